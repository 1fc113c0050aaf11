// Copyright 2026 The bitsiege Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef BITSIEGE_HARNESS_H_
#define BITSIEGE_HARNESS_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bitsiege/attack.h"
#include "bitsiege/model.h"

namespace bitsiege {

/// Sweep description, read from a JSON object:
///
///   {
///     "victim": "victim.bsm",          float model file
///     "eval": "test.bsd",              dataset file
///     "nq": [8, 6, 4],
///     "rp": [0.6, 0.8, 1.0],
///     "seeds": [0, 1, 2],              or "seed_count": 10 (seeds 0..9)
///     "ranking": ["fl2r", "random", "gradient"],
///     "recon": ["czr", "allzeros", "allones"],
///     "nbf": 100,
///     "gradient_batch": 64,            optional
///     "out": "results"                 optional, overridden by --out
///   }
///
/// Relative paths resolve against the directory holding the config file.
struct ExperimentConfig {
  std::filesystem::path victim;
  std::filesystem::path eval;
  std::vector<int> bits;
  std::vector<double> recovery_rates;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> rankings;
  std::vector<std::string> reconstructions;
  std::size_t n_flips = 0;
  std::size_t gradient_batch = 64;
  std::filesystem::path out_dir;

  /// Throws Error on empty axes, unknown method names, rp outside [0, 1] or
  /// bit widths outside {4, 6, 8}.
  void validate() const;
};

ExperimentConfig parse_config(const std::string& json_text,
                              const std::filesystem::path& base_dir);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Replaces the seed list with base, base + 1, ... keeping its length.
void apply_seed_base(ExperimentConfig& config, std::uint64_t base);

struct RunSpec {
  int bits = 8;
  double recovery_rate = 1.0;
  std::uint64_t seed = 0;
  std::string ranking;
  std::string reconstruction;
};

/// Cartesian product in nq, rp, seed, ranking, recon order.
std::vector<RunSpec> expand(const ExperimentConfig& config);

/// 16 hex digits of FNV-1a over the run's canonical description.
std::string run_id(const RunSpec& run);

/// "random" is seeded with seed ^ 0xd1b54a32d192ed03.
RankingMethod make_ranking(const std::string& name, std::uint64_t seed,
                           std::size_t gradient_batch);

/// Runs every expanded configuration, `jobs` at a time. The result order is
/// the expand() order regardless of `jobs`.
std::vector<AttackTrace> run_sweep(const ExperimentConfig& config,
                                   const FloatModel& victim,
                                   const Dataset& eval, std::size_t jobs);

/// Mean and min/max across seeds, per configuration and flip index.
struct Envelope {
  int bits = 8;
  double recovery_rate = 1.0;
  std::string ranking;
  std::string reconstruction;
  std::size_t num_seeds = 0;
  std::vector<double> mean;
  std::vector<double> min;
  std::vector<double> max;
};

std::vector<Envelope> aggregate(const std::vector<AttackTrace>& traces);

/// nq,rp,seed,ranking,recon,flip_index,accuracy; one row per trace point.
std::string traces_csv(const std::vector<AttackTrace>& traces);
/// Mean accuracy at flip counts 0, 10, 20, 50, 100 (those within the run).
std::string summary_csv(const std::vector<Envelope>& envelopes);
/// nq,rp,ranking,recon,seeds,flip_index,mean,min,max.
std::string envelope_csv(const std::vector<Envelope>& envelopes);

/// Reads every *.trace under `dir` (recursively), sorted by
/// (nq, rp, seed, ranking, recon).
std::vector<AttackTrace> load_traces(const std::filesystem::path& dir);

/// Writes results.csv, summary.csv and envelope.csv into `dir`.
void write_report(const std::vector<AttackTrace>& traces,
                  const std::filesystem::path& dir);

/// Writes traces/<run_id>.trace for each run plus the report files.
void write_sweep(const ExperimentConfig& config,
                 const std::vector<AttackTrace>& traces,
                 const std::filesystem::path& dir);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Built-in self checks: CZR against the exhaustive oracle, sign-bit
/// algebra, quantization round trip, analytic vs numeric gradients.
std::vector<CheckResult> run_verification();

}  // namespace bitsiege

#endif  // BITSIEGE_HARNESS_H_
