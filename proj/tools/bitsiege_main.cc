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

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "bitsiege/attack.h"
#include "bitsiege/error.h"
#include "bitsiege/fixtures.h"
#include "bitsiege/harness.h"
#include "bitsiege/io.h"
#include "bitsiege/quantization.h"
#include "json.hpp"

namespace {

using namespace bitsiege;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitVerify = 2;
constexpr int kExitIo = 3;

// Reads the data/training description consumed by `train`. Missing keys
// keep the desk defaults.
std::pair<SynthSpec, TrainConfig> load_train_spec(const fs::path& path) {
  SynthSpec synth = desk_synth_spec();
  TrainConfig cfg = desk_train_config();
  if (path.empty()) return {synth, cfg};
  try {
    const auto j = nlohmann::json::parse(read_file(path));
    if (j.contains("synth")) {
      const auto& s = j.at("synth");
      synth.num_classes = s.value("classes", synth.num_classes);
      synth.samples_per_class =
          s.value("samples_per_class", synth.samples_per_class);
      synth.input_shape = s.value("input_shape", synth.input_shape);
      synth.noise_stddev = s.value("noise", synth.noise_stddev);
      synth.seed = s.value("seed", synth.seed);
    }
    if (j.contains("train")) {
      const auto& t = j.at("train");
      cfg.epochs = t.value("epochs", cfg.epochs);
      cfg.learning_rate = t.value("learning_rate", cfg.learning_rate);
      cfg.l1 = t.value("l1", cfg.l1);
      cfg.batch_size = t.value("batch_size", cfg.batch_size);
      cfg.seed = t.value("seed", cfg.seed);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(path.string() + ": " + e.what());
  }
  return {synth, cfg};
}

ExperimentConfig load_experiment(const fs::path& path,
                                 std::optional<std::uint64_t> seed_base) {
  ExperimentConfig config = load_config(path);
  if (seed_base) apply_seed_base(config, *seed_base);
  return config;
}

int cmd_train(const fs::path& spec_path, const fs::path& out) {
  const auto [synth, cfg] = load_train_spec(spec_path);
  const SplitData data = gen_synthetic(synth);
  Architecture arch = desk_architecture(synth.num_classes);
  arch.input_shape = synth.input_shape;
  const FloatModel model = train(arch, data.train, cfg);
  save_model(model, out / "victim.bsm");
  save_dataset(data.train, synth.input_shape, synth.num_classes,
               out / "train.bsd");
  save_dataset(data.test, synth.input_shape, synth.num_classes,
               out / "test.bsd");
  std::printf("train accuracy %.4f  test accuracy %.4f\n",
              accuracy(model, data.train), accuracy(model, data.test));
  std::printf("wrote %s\n", (out / "victim.bsm").c_str());
  return kExitOk;
}

int cmd_quantize(const fs::path& model_path, int bits, const fs::path& out) {
  const QuantModel q = quantize_model(load_model(model_path), bits);
  save_qmodel(q, out);
  std::printf("%zu weights, %zu weight bits -> %s\n", q.total_weights(),
              q.total_weight_bits(), out.c_str());
  return kExitOk;
}

int cmd_attack(const ExperimentConfig& config, const fs::path& out) {
  const auto runs = expand(config);
  if (runs.size() != 1) {
    std::cerr << "attack: config must name exactly one value per axis ("
              << runs.size() << " combinations given); use sweep\n";
    return kExitUsage;
  }
  const RunSpec& run = runs.front();
  const QuantModel victim = quantize_model(load_model(config.victim), run.bits);
  const Dataset eval = load_dataset(config.eval).data;
  const AttackTrace trace = run_attack(
      victim, run.recovery_rate, run.seed,
      make_ranking(run.ranking, run.seed, config.gradient_batch),
      *parse_reconstruction(run.reconstruction), config.n_flips, eval);
  const fs::path file = out / (run_id(run) + ".trace");
  save_trace(trace, file);
  std::printf("accuracy %.4f -> %.4f after %zu flips; wrote %s\n",
              trace.accuracy.front(), trace.accuracy.back(), trace.flips.size(),
              file.c_str());
  return kExitOk;
}

int cmd_sweep(const ExperimentConfig& config, const fs::path& out,
              std::size_t jobs) {
  const FloatModel victim = load_model(config.victim);
  const Dataset eval = load_dataset(config.eval).data;
  const auto traces = run_sweep(config, victim, eval, jobs);
  write_sweep(config, traces, out);
  std::printf("%zu runs -> %s\n", traces.size(), out.c_str());
  return kExitOk;
}

int cmd_report(const fs::path& dir) {
  const auto traces = load_traces(dir);
  write_report(traces, dir);
  std::printf("%zu traces -> %s\n", traces.size(),
              (dir / "results.csv").c_str());
  return kExitOk;
}

int cmd_verify() {
  bool ok = true;
  for (const CheckResult& r : run_verification()) {
    std::printf("%s %-18s %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(),
                r.detail.c_str());
    ok = ok && r.passed;
  }
  return ok ? kExitOk : kExitVerify;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bitsiege: bit-flip attack simulator for quantized networks"};
  app.require_subcommand(1);

  fs::path config_path;
  fs::path out_dir;
  std::size_t jobs = 1;
  std::optional<std::uint64_t> seed_base;

  auto* train_cmd = app.add_subcommand("train", "Generate data and train a victim");
  fs::path spec_path;
  train_cmd->add_option("--config", spec_path, "JSON data/training spec");
  train_cmd->add_option("--out", out_dir, "Output directory")->required();

  auto* quant_cmd = app.add_subcommand("quantize", "Quantize a float model");
  fs::path model_path;
  int bits = 8;
  quant_cmd->add_option("--model", model_path, "Float model file")->required();
  quant_cmd->add_option("--nq", bits, "Bit width (4, 6 or 8)");
  quant_cmd->add_option("--out", out_dir, "Output qmodel file")->required();

  auto* attack_cmd = app.add_subcommand("attack", "Run a single attack");
  attack_cmd->add_option("--config", config_path, "Experiment config")->required();
  attack_cmd->add_option("--out", out_dir, "Output directory");
  attack_cmd->add_option("--seed-base", seed_base, "Seed override");

  auto* sweep_cmd = app.add_subcommand("sweep", "Run every configuration");
  sweep_cmd->add_option("--config", config_path, "Experiment config")->required();
  sweep_cmd->add_option("--out", out_dir, "Output directory");
  sweep_cmd->add_option("--jobs", jobs, "Parallel runs")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--seed-base", seed_base, "Seeds become base + run index");

  auto* report_cmd = app.add_subcommand("report", "Summarize a result directory");
  fs::path report_dir;
  report_cmd->add_option("dir", report_dir, "Result directory");
  report_cmd->add_option("--out", out_dir, "Result directory");

  app.add_subcommand("verify", "Run the built-in self checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*train_cmd) return cmd_train(spec_path, out_dir);
    if (*quant_cmd) return cmd_quantize(model_path, bits, out_dir);
    if (*attack_cmd || *sweep_cmd) {
      const ExperimentConfig config = load_experiment(config_path, seed_base);
      const fs::path out = out_dir.empty() ? config.out_dir : out_dir;
      if (out.empty()) {
        std::cerr << "no output directory: pass --out or set \"out\"\n";
        return kExitUsage;
      }
      return *attack_cmd ? cmd_attack(config, out) : cmd_sweep(config, out, jobs);
    }
    if (*report_cmd) {
      const fs::path dir = report_dir.empty() ? out_dir : report_dir;
      if (dir.empty()) {
        std::cerr << "report: give a result directory\n";
        return kExitUsage;
      }
      return cmd_report(dir);
    }
    return cmd_verify();
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}
