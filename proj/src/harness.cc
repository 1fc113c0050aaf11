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

#include "bitsiege/harness.h"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <random>
#include <thread>
#include <tuple>

#include "bitsiege/error.h"
#include "bitsiege/fixtures.h"
#include "bitsiege/io.h"
#include "bitsiege/quantization.h"
#include "bitsiege/reconstruction.h"
#include "json.hpp"

namespace bitsiege {
namespace {

using nlohmann::json;

std::string fmt(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

bool known_ranking(const std::string& name) {
  return name == "fl2r" || name == "random" || name == "gradient";
}

template <class T>
std::vector<T> read_list(const json& j, const char* key) {
  if (!j.contains(key)) throw Error(std::string("config is missing '") + key + "'");
  const json& v = j.at(key);
  if (!v.is_array()) return {v.get<T>()};
  return v.get<std::vector<T>>();
}

auto trace_key(const AttackTrace& t) {
  return std::tie(t.config.bits, t.config.recovery_rate, t.config.seed,
                  t.config.ranking, t.config.reconstruction);
}

void sort_traces(std::vector<AttackTrace>& traces) {
  std::stable_sort(traces.begin(), traces.end(),
                   [](const AttackTrace& a, const AttackTrace& b) {
                     return trace_key(a) < trace_key(b);
                   });
}

}  // namespace

void ExperimentConfig::validate() const {
  if (bits.empty() || recovery_rates.empty() || seeds.empty() ||
      rankings.empty() || reconstructions.empty()) {
    throw Error("config axes nq, rp, seeds, ranking and recon must be nonempty");
  }
  for (int b : bits) {
    if (!is_supported_bitwidth(b)) {
      throw Error("nq " + std::to_string(b) + " not in {4, 6, 8}");
    }
  }
  for (double rp : recovery_rates) {
    if (!(rp >= 0.0 && rp <= 1.0)) throw Error("rp " + fmt(rp) + " not in [0, 1]");
  }
  for (const auto& r : rankings) {
    if (!known_ranking(r)) throw Error("unknown ranking '" + r + "'");
  }
  for (const auto& r : reconstructions) {
    if (!parse_reconstruction(r)) throw Error("unknown recon '" + r + "'");
  }
  if (n_flips == 0) throw Error("nbf must be at least 1");
  if (gradient_batch == 0) throw Error("gradient_batch must be at least 1");
}

ExperimentConfig parse_config(const std::string& json_text,
                              const std::filesystem::path& base_dir) {
  ExperimentConfig c;
  try {
    const json j = json::parse(json_text);
    if (!j.is_object()) throw Error("config must be a JSON object");
    auto path = [&](const char* key) {
      std::filesystem::path p = j.at(key).get<std::string>();
      return p.is_relative() ? base_dir / p : p;
    };
    c.victim = path("victim");
    c.eval = path("eval");
    c.bits = read_list<int>(j, "nq");
    c.recovery_rates = read_list<double>(j, "rp");
    if (j.contains("seeds")) {
      c.seeds = read_list<std::uint64_t>(j, "seeds");
    } else {
      const auto n = j.at("seed_count").get<std::uint64_t>();
      for (std::uint64_t s = 0; s < n; ++s) c.seeds.push_back(s);
    }
    c.rankings = read_list<std::string>(j, "ranking");
    c.reconstructions = read_list<std::string>(j, "recon");
    c.n_flips = j.at("nbf").get<std::size_t>();
    if (j.contains("gradient_batch")) {
      c.gradient_batch = j.at("gradient_batch").get<std::size_t>();
    }
    if (j.contains("out")) c.out_dir = path("out");
  } catch (const json::parse_error& e) {
    throw ParseError("byte " + std::to_string(e.byte), e.what());
  } catch (const json::exception& e) {
    throw Error(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_file(path), path.parent_path());
}

void apply_seed_base(ExperimentConfig& config, std::uint64_t base) {
  for (std::size_t i = 0; i < config.seeds.size(); ++i) {
    config.seeds[i] = base + i;
  }
}

std::vector<RunSpec> expand(const ExperimentConfig& config) {
  std::vector<RunSpec> runs;
  for (int bits : config.bits) {
    for (double rp : config.recovery_rates) {
      for (std::uint64_t seed : config.seeds) {
        for (const auto& ranking : config.rankings) {
          for (const auto& recon : config.reconstructions) {
            runs.push_back({bits, rp, seed, ranking, recon});
          }
        }
      }
    }
  }
  return runs;
}

std::string run_id(const RunSpec& run) {
  const std::string canon = "nq=" + std::to_string(run.bits) +
                            ";rp=" + fmt(run.recovery_rate) +
                            ";seed=" + std::to_string(run.seed) +
                            ";ranking=" + run.ranking +
                            ";recon=" + run.reconstruction;
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canon) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {
constexpr std::uint64_t kRandomRankingSalt = 0xd1b54a32d192ed03ULL;
}  // namespace

RankingMethod make_ranking(const std::string& name, std::uint64_t seed,
                           std::size_t gradient_batch) {
  if (name == "fl2r") return FL2R{};
  // Recovery draws from mt19937_64(seed); the random ranking gets its own
  // stream so the two are not the same sequence.
  if (name == "random") return RandomBits{seed ^ kRandomRankingSalt};
  if (name == "gradient") return GradientBaseline{gradient_batch};
  throw Error("unknown ranking '" + name + "'");
}

std::vector<AttackTrace> run_sweep(const ExperimentConfig& config,
                                   const FloatModel& victim,
                                   const Dataset& eval, std::size_t jobs) {
  config.validate();
  std::map<int, QuantModel> quantized;
  for (int bits : config.bits) quantized.emplace(bits, quantize_model(victim, bits));

  const std::vector<RunSpec> runs = expand(config);
  std::vector<AttackTrace> traces(runs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;

  auto worker = [&] {
    for (std::size_t i = next++; i < runs.size(); i = next++) {
      try {
        const RunSpec& run = runs[i];
        traces[i] = run_attack(
            quantized.at(run.bits), run.recovery_rate, run.seed,
            make_ranking(run.ranking, run.seed, config.gradient_batch),
            *parse_reconstruction(run.reconstruction), config.n_flips, eval);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(runs.size(), 1));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return traces;
}

std::vector<Envelope> aggregate(const std::vector<AttackTrace>& traces) {
  std::vector<Envelope> out;
  std::map<std::tuple<int, double, std::string, std::string>, std::size_t> index;
  for (const AttackTrace& t : traces) {
    const auto key = std::make_tuple(t.config.bits, t.config.recovery_rate,
                                     t.config.ranking, t.config.reconstruction);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, out.size()).first;
      Envelope e{t.config.bits, t.config.recovery_rate, t.config.ranking,
                 t.config.reconstruction, 0, {}, {}, {}};
      e.mean.assign(t.accuracy.size(), 0.0);
      e.min = t.accuracy;
      e.max = t.accuracy;
      out.push_back(std::move(e));
    }
    Envelope& e = out[it->second];
    const std::size_t n = std::min(e.mean.size(), t.accuracy.size());
    e.mean.resize(n);
    e.min.resize(n);
    e.max.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      e.mean[k] += t.accuracy[k];
      e.min[k] = std::min(e.min[k], t.accuracy[k]);
      e.max[k] = std::max(e.max[k], t.accuracy[k]);
    }
    ++e.num_seeds;
  }
  for (Envelope& e : out) {
    for (double& m : e.mean) {
      m /= static_cast<double>(e.num_seeds);
      // Summation rounding can leave the mean a hair outside the envelope.
    }
    for (std::size_t k = 0; k < e.mean.size(); ++k) {
      e.mean[k] = std::clamp(e.mean[k], e.min[k], e.max[k]);
    }
  }
  return out;
}

std::string traces_csv(const std::vector<AttackTrace>& traces) {
  std::string out = "nq,rp,seed,ranking,recon,flip_index,accuracy\n";
  for (const AttackTrace& t : traces) {
    const std::string prefix =
        std::to_string(t.config.bits) + "," + fmt(t.config.recovery_rate) +
        "," + std::to_string(t.config.seed) + "," + t.config.ranking + "," +
        t.config.reconstruction + ",";
    for (std::size_t k = 0; k < t.accuracy.size(); ++k) {
      out += prefix + std::to_string(k) + "," + fmt(t.accuracy[k]) + "\n";
    }
  }
  return out;
}

std::string summary_csv(const std::vector<Envelope>& envelopes) {
  std::string out = "nq,rp,ranking,recon,seeds,flips,mean_accuracy\n";
  for (const Envelope& e : envelopes) {
    for (std::size_t flips : {0, 10, 20, 50, 100}) {
      if (flips >= e.mean.size()) continue;
      out += std::to_string(e.bits) + "," + fmt(e.recovery_rate) + "," +
             e.ranking + "," + e.reconstruction + "," +
             std::to_string(e.num_seeds) + "," + std::to_string(flips) + "," +
             fmt(e.mean[flips]) + "\n";
    }
  }
  return out;
}

std::string envelope_csv(const std::vector<Envelope>& envelopes) {
  std::string out = "nq,rp,ranking,recon,seeds,flip_index,mean,min,max\n";
  for (const Envelope& e : envelopes) {
    for (std::size_t k = 0; k < e.mean.size(); ++k) {
      out += std::to_string(e.bits) + "," + fmt(e.recovery_rate) + "," +
             e.ranking + "," + e.reconstruction + "," +
             std::to_string(e.num_seeds) + "," + std::to_string(k) + "," +
             fmt(e.mean[k]) + "," + fmt(e.min[k]) + "," + fmt(e.max[k]) + "\n";
    }
  }
  return out;
}

std::vector<AttackTrace> load_traces(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw IoError(dir.string() + " is not a directory");
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".trace") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<AttackTrace> traces;
  for (const auto& f : files) traces.push_back(load_trace(f));
  sort_traces(traces);
  return traces;
}

void write_report(const std::vector<AttackTrace>& traces,
                  const std::filesystem::path& dir) {
  std::vector<AttackTrace> sorted = traces;
  sort_traces(sorted);
  const auto envelopes = aggregate(sorted);
  write_file(dir / "results.csv", traces_csv(sorted));
  write_file(dir / "summary.csv", summary_csv(envelopes));
  write_file(dir / "envelope.csv", envelope_csv(envelopes));
}

void write_sweep(const ExperimentConfig& config,
                 const std::vector<AttackTrace>& traces,
                 const std::filesystem::path& dir) {
  const auto runs = expand(config);
  if (runs.size() != traces.size()) {
    throw Error("sweep produced " + std::to_string(traces.size()) +
                " traces for " + std::to_string(runs.size()) + " runs");
  }
  for (std::size_t i = 0; i < runs.size(); ++i) {
    save_trace(traces[i], dir / "traces" / (run_id(runs[i]) + ".trace"));
  }
  write_report(traces, dir);
}

// ---- built-in verification ----

namespace {

CheckResult check_czr_oracle() {
  std::size_t cases = 0;
  for (int bits : {4, 6, 8}) {
    for (unsigned pattern = 0; pattern < (1u << bits); ++pattern) {
      for (unsigned mask = 0; mask < (1u << bits); ++mask) {
        const PartialCode pc{static_cast<std::uint8_t>(pattern),
                             static_cast<std::uint8_t>(mask), bits};
        const int czr = reconstruct_code(pc, ReconstructionMethod::kCZR);
        const int oracle = oracle_min_abs(pc);
        ++cases;
        if (czr != oracle) {
          return {"czr-oracle", false,
                  "nq=" + std::to_string(bits) + " pattern=" +
                      std::to_string(pattern) + " mask=" +
                      std::to_string(mask) + ": czr " + std::to_string(czr) +
                      " vs oracle " + std::to_string(oracle)};
        }
      }
    }
  }
  return {"czr-oracle", true, std::to_string(cases) + " (code, mask) pairs"};
}

CheckResult check_sign_flip() {
  for (int bits : {4, 6, 8}) {
    const int shift = 1 << (bits - 1);
    const int quarter = 1 << (bits - 3);
    for (int c = code_min(bits); c <= code_max(bits); ++c) {
      const int flipped = flip_bit(c, bits, bits - 1);
      if (std::abs(flipped - c) != shift) {
        return {"sign-bit-algebra", false,
                "nq=" + std::to_string(bits) + " code " + std::to_string(c)};
      }
      if (c >= shift - quarter && std::abs(flipped) > quarter) {
        return {"sign-bit-algebra", false,
                "nq=" + std::to_string(bits) + " top-quartile code " +
                    std::to_string(c) + " flips to " + std::to_string(flipped)};
      }
    }
  }
  return {"sign-bit-algebra", true, "nq 4, 6, 8 exhaustive"};
}

CheckResult check_round_trip() {
  std::mt19937_64 rng(2024);
  for (int bits : {4, 6, 8}) {
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    const double scale = 1.5 / code_max(bits);
    for (int i = 0; i < 10000; ++i) {
      const double w = dist(rng);
      const double clamped =
          std::clamp(w, code_min(bits) * scale, code_max(bits) * scale);
      const double err =
          std::abs(dequantize(quantize(w, scale, bits), scale) - clamped);
      if (err > scale / 2 + 1e-9) {
        return {"quant-round-trip", false,
                "nq=" + std::to_string(bits) + " w=" + fmt(w)};
      }
    }
  }
  return {"quant-round-trip", true, "10000 weights per nq"};
}

CheckResult check_gradients() {
  const Architecture arch{{2, 5, 5},
                          3,
                          {Conv2D{2, 3, 3, 1, 1}, ReLU{}, MaxPool{2},
                           Conv2D{3, 4, 2}, ReLU{}, Flatten{}, Dense{4, 3}}};
  const auto [model, batch] = smooth_gradient_fixture(arch, 3, 7);
  const GradientCheck check = finite_difference_check(model, batch);
  const double worst = check.max_relative_error;
  return {"gradient-check", worst <= 1e-4, "max relative error " + fmt(worst)};
}

}  // namespace

std::vector<CheckResult> run_verification() {
  return {check_czr_oracle(), check_sign_flip(), check_round_trip(),
          check_gradients()};
}

}  // namespace bitsiege
