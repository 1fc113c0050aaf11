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

#ifndef BITSIEGE_ATTACK_H_
#define BITSIEGE_ATTACK_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "bitsiege/model.h"
#include "bitsiege/quantization.h"
#include "bitsiege/reconstruction.h"

namespace bitsiege {

/// Filter `filter` of parametric layer `layer` (conv: output channel, dense:
/// output row).
struct FilterRef {
  std::size_t layer = 0;
  std::size_t filter = 0;
  auto operator<=>(const FilterRef&) const = default;
};

/// One bit to flip. `weight` indexes the flattened (c, k1, k2) position
/// inside the filter.
struct FlipRecord {
  FilterRef filter;
  std::size_t weight = 0;
  int bit = 0;
  auto operator<=>(const FlipRecord&) const = default;
};

/// Normalized filter-wise L2 ranking.
struct FL2R {};
struct RandomBits {
  std::uint64_t seed = 0;
};
/// Single-shot gradient ranking on the first `batch_size` evaluation samples.
struct GradientBaseline {
  std::size_t batch_size = 64;
};
using RankingMethod = std::variant<FL2R, RandomBits, GradientBaseline>;

std::string ranking_name(const RankingMethod& method);

double filter_l2(std::span<const double> filter);
/// filter_l2 divided by the element count (C_in*K*K, or in_features).
double filter_importance(std::span<const double> filter);

/// Greedy sign-bit selection on a working copy of `model`: take the filter
/// with the highest importance, the largest-magnitude weight in it that was
/// not selected before, flip its sign bit, rescore that filter, repeat.
/// Ties go to the lowest (layer, filter), then the lowest weight index.
/// Throws Error unless 1 <= n_flips <= model.total_weights().
std::vector<FlipRecord> select_vulnerable_bits(const QuantModel& model,
                                               std::size_t n_flips);

/// Uniform sample without replacement over every (weight, bit) pair, in
/// random order.
std::vector<FlipRecord> select_random_bits(const QuantModel& model,
                                           std::size_t n_flips,
                                           std::uint64_t seed);

/// Ranks weights by |dLoss/dw| on `batch` and takes sign bits whose flip
/// raises the loss to first order. Throws Error on an empty batch.
std::vector<FlipRecord> select_gradient_bits(const QuantModel& reconstructed,
                                             const Dataset& batch,
                                             std::size_t n_flips);

/// XORs each record's bit into the victim's codes. Throws Error on an
/// out-of-range record.
QuantModel apply_flips(const QuantModel& victim,
                       std::span<const FlipRecord> records);

struct AttackConfig {
  int bits = 8;
  double recovery_rate = 1.0;
  std::uint64_t seed = 0;
  std::string ranking;
  std::string reconstruction;
  std::size_t n_flips = 0;
  bool operator==(const AttackConfig&) const = default;
};

struct AttackTrace {
  AttackConfig config;
  std::vector<FlipRecord> flips;
  /// accuracy[0] before any flip, accuracy[i] after the first i flips.
  std::vector<double> accuracy;
  bool operator==(const AttackTrace&) const = default;
};

/// Recover, reconstruct a surrogate, rank on the surrogate, then flip the
/// victim cumulatively and record its accuracy on `eval` after each flip.
AttackTrace run_attack(const QuantModel& victim, double recovery_rate,
                       std::uint64_t seed, const RankingMethod& ranking,
                       ReconstructionMethod reconstruction,
                       std::size_t n_flips, const Dataset& eval);

}  // namespace bitsiege

#endif  // BITSIEGE_ATTACK_H_
