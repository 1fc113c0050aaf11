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

#include "bitsiege/attack.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "bitsiege/error.h"
#include "bitsiege/fixtures.h"
#include "bitsiege/recovery.h"

namespace bitsiege {

std::string ranking_name(const RankingMethod& method) {
  if (std::holds_alternative<FL2R>(method)) return "fl2r";
  if (std::holds_alternative<RandomBits>(method)) return "random";
  return "gradient";
}

double filter_l2(std::span<const double> filter) {
  double sum = 0.0;
  for (double w : filter) sum += w * w;
  return std::sqrt(sum);
}

double filter_importance(std::span<const double> filter) {
  if (filter.empty()) throw Error("importance of an empty filter");
  return filter_l2(filter) / static_cast<double>(filter.size());
}

namespace {

void check_flip_count(std::size_t n_flips, std::size_t limit,
                      const char* what) {
  if (n_flips == 0) throw Error("number of bit flips must be at least 1");
  if (n_flips > limit) {
    throw Error("requested " + std::to_string(n_flips) + " bit flips but the "
                "model has only " + std::to_string(limit) + " " + what);
  }
}

int sign_bit(const QuantLayer& layer) { return layer.params.bits - 1; }

}  // namespace

std::vector<FlipRecord> select_vulnerable_bits(const QuantModel& model,
                                               std::size_t n_flips) {
  check_flip_count(n_flips, model.total_weights(), "weights");

  struct FilterState {
    std::vector<double> values;  // dequantized working copy
    std::vector<bool> taken;
    std::size_t remaining = 0;
    double score = 0.0;
  };
  std::vector<std::vector<FilterState>> filters(model.layers.size());
  std::vector<std::vector<int>> codes(model.layers.size());
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const QuantLayer& layer = model.layers[l];
    codes[l].assign(layer.codes.begin(), layer.codes.end());
    const std::size_t size = layer.filter_size();
    for (std::size_t f = 0; f < layer.num_filters(); ++f) {
      FilterState s;
      for (std::size_t k = 0; k < size; ++k) {
        s.values.push_back(
            dequantize(layer.codes[f * size + k], layer.params.scale));
      }
      s.taken.assign(size, false);
      s.remaining = size;
      s.score = filter_importance(s.values);
      filters[l].push_back(std::move(s));
    }
  }

  std::vector<FlipRecord> picks;
  picks.reserve(n_flips);
  while (picks.size() < n_flips) {
    // Filters whose weights have all been selected drop out of the argmax.
    const FilterState* best = nullptr;
    FilterRef best_ref;
    for (std::size_t l = 0; l < filters.size(); ++l) {
      for (std::size_t f = 0; f < filters[l].size(); ++f) {
        const FilterState& s = filters[l][f];
        if (s.remaining == 0) continue;
        if (best == nullptr || s.score > best->score) {
          best = &s;
          best_ref = {l, f};
        }
      }
    }
    FilterState& target = filters[best_ref.layer][best_ref.filter];

    std::size_t w_best = target.values.size();
    for (std::size_t k = 0; k < target.values.size(); ++k) {
      if (target.taken[k]) continue;
      if (w_best == target.values.size() ||
          target.values[k] * target.values[k] >
              target.values[w_best] * target.values[w_best]) {
        w_best = k;
      }
    }

    const QuantLayer& layer = model.layers[best_ref.layer];
    const int bit = sign_bit(layer);
    picks.push_back({best_ref, w_best, bit});
    target.taken[w_best] = true;
    --target.remaining;

    int& code = codes[best_ref.layer][best_ref.filter * layer.filter_size() +
                                      w_best];
    code = flip_bit(code, layer.params.bits, bit);
    target.values[w_best] = dequantize(code, layer.params.scale);
    target.score = filter_importance(target.values);
  }
  return picks;
}

std::vector<FlipRecord> select_random_bits(const QuantModel& model,
                                           std::size_t n_flips,
                                           std::uint64_t seed) {
  // Global bit index: layers in order, within a layer weight * bits + bit.
  std::vector<std::size_t> offsets{0};
  for (const auto& layer : model.layers) {
    offsets.push_back(offsets.back() +
                      layer.codes.size() *
                          static_cast<std::size_t>(layer.params.bits));
  }
  const std::size_t total = offsets.back();
  check_flip_count(n_flips, total, "weight bits");

  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::vector<FlipRecord> picks;
  picks.reserve(n_flips);
  for (std::size_t i = 0; i < n_flips; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, total - 1);
    std::swap(order[i], order[pick(rng)]);
    const std::size_t g = order[i];
    const auto l = static_cast<std::size_t>(
        std::upper_bound(offsets.begin(), offsets.end(), g) - offsets.begin() -
        1);
    const QuantLayer& layer = model.layers[l];
    const auto bits = static_cast<std::size_t>(layer.params.bits);
    const std::size_t weight = (g - offsets[l]) / bits;
    const std::size_t size = layer.filter_size();
    picks.push_back({{l, weight / size},
                     weight % size,
                     static_cast<int>((g - offsets[l]) % bits)});
  }
  return picks;
}

std::vector<FlipRecord> select_gradient_bits(const QuantModel& reconstructed,
                                             const Dataset& batch,
                                             std::size_t n_flips) {
  if (batch.empty()) throw Error("gradient ranking needs a nonempty batch");
  check_flip_count(n_flips, reconstructed.total_weights(), "weights");
  const ModelGradient grad = gradient(dequantize_model(reconstructed), batch);

  struct Candidate {
    std::size_t layer;
    std::size_t index;
    double grad;
  };
  std::vector<Candidate> ranked;
  for (std::size_t l = 0; l < reconstructed.layers.size(); ++l) {
    const auto g = grad.params[l].weights.data();
    for (std::size_t i = 0; i < g.size(); ++i) ranked.push_back({l, i, g[i]});
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const Candidate& a, const Candidate& b) {
                     return std::abs(a.grad) > std::abs(b.grad);
                   });

  std::vector<FlipRecord> picks;
  std::vector<const Candidate*> skipped;
  auto take = [&](const Candidate& c) {
    const QuantLayer& layer = reconstructed.layers[c.layer];
    const std::size_t size = layer.filter_size();
    picks.push_back({{c.layer, c.index / size}, c.index % size,
                     sign_bit(layer)});
  };
  for (const Candidate& c : ranked) {
    if (picks.size() == n_flips) break;
    const QuantLayer& layer = reconstructed.layers[c.layer];
    const int code = layer.codes[c.index];
    const int delta = flip_bit(code, layer.params.bits, sign_bit(layer)) - code;
    // First-order loss change is grad * delta * scale.
    if (c.grad * delta > 0.0) {
      take(c);
    } else {
      skipped.push_back(&c);
    }
  }
  // Not enough loss-raising flips: fall back to the skipped weights in rank
  // order so the output always has n_flips records.
  for (const Candidate* c : skipped) {
    if (picks.size() == n_flips) break;
    take(*c);
  }
  return picks;
}

namespace {

std::size_t checked_index(const QuantModel& model, const FlipRecord& r) {
  if (r.filter.layer >= model.layers.size()) {
    throw Error("flip record layer " + std::to_string(r.filter.layer) +
                " out of range");
  }
  const QuantLayer& layer = model.layers[r.filter.layer];
  if (r.filter.filter >= layer.num_filters() ||
      r.weight >= layer.filter_size() || r.bit < 0 ||
      r.bit >= layer.params.bits) {
    throw Error("flip record (" + std::to_string(r.filter.layer) + ", " +
                std::to_string(r.filter.filter) + ", " +
                std::to_string(r.weight) + ", " + std::to_string(r.bit) +
                ") out of range");
  }
  return r.filter.filter * layer.filter_size() + r.weight;
}

}  // namespace

QuantModel apply_flips(const QuantModel& victim,
                       std::span<const FlipRecord> records) {
  QuantModel out = victim;
  for (const FlipRecord& r : records) {
    const std::size_t i = checked_index(out, r);
    QuantLayer& layer = out.layers[r.filter.layer];
    layer.codes[i] = static_cast<std::int8_t>(
        flip_bit(layer.codes[i], layer.params.bits, r.bit));
  }
  return out;
}

AttackTrace run_attack(const QuantModel& victim, double recovery_rate,
                       std::uint64_t seed, const RankingMethod& ranking,
                       ReconstructionMethod reconstruction,
                       std::size_t n_flips, const Dataset& eval) {
  // The ranking only ever sees the surrogate built from recovered bits.
  const QuantModel surrogate = reconstruct_model(
      simulate_recovery(victim, recovery_rate, seed), reconstruction);

  AttackTrace trace;
  trace.config = {victim.layers.empty() ? 8 : victim.layers[0].params.bits,
                  recovery_rate,
                  seed,
                  ranking_name(ranking),
                  std::string(to_string(reconstruction)),
                  n_flips};
  if (std::holds_alternative<FL2R>(ranking)) {
    trace.flips = select_vulnerable_bits(surrogate, n_flips);
  } else if (const auto* r = std::get_if<RandomBits>(&ranking)) {
    trace.flips = select_random_bits(surrogate, n_flips, r->seed);
  } else {
    const auto& g = std::get<GradientBaseline>(ranking);
    trace.flips = select_gradient_bits(surrogate, eval.slice(0, g.batch_size),
                                       n_flips);
  }

  QuantModel current = victim;
  FloatModel dequantized = dequantize_model(current);
  trace.accuracy.reserve(n_flips + 1);
  trace.accuracy.push_back(accuracy(dequantized, eval));
  for (const FlipRecord& r : trace.flips) {
    const std::size_t i = checked_index(current, r);
    QuantLayer& layer = current.layers[r.filter.layer];
    layer.codes[i] = static_cast<std::int8_t>(
        flip_bit(layer.codes[i], layer.params.bits, r.bit));
    dequantized.params[r.filter.layer].weights[i] =
        dequantize(layer.codes[i], layer.params.scale);
    trace.accuracy.push_back(accuracy(dequantized, eval));
  }
  return trace;
}

}  // namespace bitsiege
