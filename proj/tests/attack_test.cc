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

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>
#include <set>

#include "bitsiege/attack.h"
#include "bitsiege/error.h"
#include "bitsiege/fixtures.h"
#include "bitsiege/recovery.h"
#include "test_util.h"

namespace bitsiege {
namespace {

using testing::dense_qmodel;

TEST(FilterL2, Examples) {
  EXPECT_EQ(filter_l2(std::vector<double>{3.0, 4.0}), 5.0);
  EXPECT_EQ(filter_l2(std::vector<double>{0.0, 0.0, 0.0}), 0.0);
  EXPECT_DOUBLE_EQ(filter_l2(std::vector<double>(8, 2.0)), 4.0 * std::sqrt(2.0));
}

TEST(FilterImportance, Examples) {
  EXPECT_EQ(filter_importance(std::vector<double>(4, 2.0)), 1.0);
  EXPECT_EQ(filter_importance(std::vector<double>{3.0, 4.0}), 2.5);
  EXPECT_THROW(filter_importance(std::vector<double>{}), Error);
}

TEST(FilterImportance, PositivelyHomogeneous) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> dist;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> f(9), g(9);
    for (double& v : f) v = dist(rng);
    const double lambda = std::exp(dist(rng));
    for (std::size_t i = 0; i < f.size(); ++i) g[i] = lambda * f[i];
    EXPECT_NEAR(filter_importance(g), lambda * filter_importance(f),
                1e-12 * lambda * filter_importance(f));
  }
}

// Two 1x1x1 filters with dequantized weights 5.0 and 1.0: codes 127 and
// round(1.0 / (5/127)) = 25.
QuantModel two_filter_model() {
  QuantModel q{Architecture{{1, 1, 1}, 2, {Conv2D{1, 2, 1}, Flatten{}}}, {}};
  q.layers.push_back({{8, 5.0 / 127}, {2, 1, 1, 1}, {127, 25}, Tensor({2})});
  return q;
}

TEST(SelectVulnerableBits, LargerNormWinsFirst) {
  const auto picks = select_vulnerable_bits(two_filter_model(), 1);
  ASSERT_EQ(picks.size(), 1u);
  EXPECT_EQ(picks[0], (FlipRecord{{0, 0}, 0, 7}));
}

TEST(SelectVulnerableBits, FlippedFilterCollapses) {
  // 127 flips to -1, |-1 * s| ~ 0.04 < 1.0, so filter 1 is next.
  const auto picks = select_vulnerable_bits(two_filter_model(), 2);
  ASSERT_EQ(picks.size(), 2u);
  EXPECT_EQ(picks[1], (FlipRecord{{0, 1}, 0, 7}));
}

TEST(SelectVulnerableBits, AllZeroModelTieBreak) {
  const QuantModel q = dense_qmodel(3, 2, {0, 0, 0, 0, 0, 0}, 1.0);
  const auto picks = select_vulnerable_bits(q, 4);
  EXPECT_EQ(picks[0], (FlipRecord{{0, 0}, 0, 7}));
  // Flipping 0 gives -128, so filter 0 stays on top until exhausted.
  EXPECT_EQ(picks[1], (FlipRecord{{0, 0}, 1, 7}));
  EXPECT_EQ(picks[2], (FlipRecord{{0, 0}, 2, 7}));
  EXPECT_EQ(picks[3], (FlipRecord{{0, 1}, 0, 7}));
}

TEST(SelectVulnerableBits, NormalizesAcrossLayers) {
  // Layer 0 filter: one weight 1.0 (importance 1/1). Layer 1 filter: four
  // weights 1.5 (l2 3, importance 3/4). Raw l2 would pick layer 1.
  QuantModel q{Architecture{{1}, 1, {Dense{1, 4}, Dense{4, 1}}}, {}};
  q.layers.push_back({{8, 1.0 / 127}, {4, 1}, {127, 0, 0, 0}, Tensor({4})});
  q.layers.push_back({{8, 1.5 / 127}, {1, 4}, {127, 127, 127, 127}, Tensor({1})});
  EXPECT_EQ(select_vulnerable_bits(q, 1)[0].filter, (FilterRef{0, 0}));
}

TEST(SelectVulnerableBits, PicksLargestMagnitudeInFilter) {
  const QuantModel q = dense_qmodel(4, 1, {3, -90, 40, 89}, 0.01);
  const auto picks = select_vulnerable_bits(q, 2);
  EXPECT_EQ(picks[0].weight, 1u);
  EXPECT_EQ(picks[1].weight, 3u);
}

TEST(SelectVulnerableBits, RejectsBadCounts) {
  const QuantModel q = two_filter_model();
  EXPECT_THROW(select_vulnerable_bits(q, 0), Error);
  EXPECT_THROW(select_vulnerable_bits(q, 3), Error);
  EXPECT_EQ(select_vulnerable_bits(q, 2).size(), 2u);
}

QuantModel random_qmodel(std::uint64_t seed, int bits) {
  return quantize_model(testing::random_model(testing::small_architecture(), seed), bits);
}

TEST(SelectVulnerableBits, NoDuplicatesAndSignBitsOnly) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const int bits = 4 + 2 * static_cast<int>(seed % 3);
    const QuantModel q = random_qmodel(seed, bits);
    const auto picks = select_vulnerable_bits(q, q.total_weights());
    const std::set<FlipRecord> unique(picks.begin(), picks.end());
    EXPECT_EQ(unique.size(), picks.size());
    for (const auto& r : picks) EXPECT_EQ(r.bit, bits - 1);
  }
}

TEST(SelectVulnerableBits, OrderInvariantUnderCommonScaling) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const QuantModel q = random_qmodel(seed, 8);
    const auto base = select_vulnerable_bits(q, 30);
    for (double lambda : {0.25, 2.0, 8.0}) {
      QuantModel scaled = q;
      for (auto& l : scaled.layers) l.params.scale *= lambda;
      EXPECT_EQ(select_vulnerable_bits(scaled, 30), base) << "lambda " << lambda;
    }
  }
}

TEST(SelectVulnerableBits, DoesNotMutateInput) {
  const QuantModel q = random_qmodel(1, 8);
  const QuantModel copy = q;
  select_vulnerable_bits(q, 10);
  EXPECT_EQ(q, copy);
}

TEST(SelectRandomBits, DeterministicDistinctAndInRange) {
  const QuantModel q = random_qmodel(2, 6);
  const auto a = select_random_bits(q, 100, 5);
  EXPECT_EQ(a, select_random_bits(q, 100, 5));
  EXPECT_NE(a, select_random_bits(q, 100, 6));
  EXPECT_EQ(std::set<FlipRecord>(a.begin(), a.end()).size(), 100u);
  EXPECT_NO_THROW(apply_flips(q, a));
  EXPECT_THROW(select_random_bits(q, q.total_weight_bits() + 1, 0), Error);
  EXPECT_EQ(select_random_bits(q, q.total_weight_bits(), 0).size(),
            q.total_weight_bits());
}

TEST(SelectRandomBits, SpreadsProportionallyAcrossLayersAndBits) {
  // Layer 0 holds 24 of 60 weights. Over 400 seeds x 10 picks the share of
  // layer-0 picks should be near 0.4, and every bit position should appear
  // near 1/6 of the time.
  const QuantModel q = random_qmodel(3, 6);
  std::size_t layer0 = 0, total = 0;
  std::map<int, std::size_t> per_bit;
  for (std::uint64_t seed = 0; seed < 400; ++seed) {
    for (const auto& r : select_random_bits(q, 10, seed)) {
      layer0 += r.filter.layer == 0;
      ++per_bit[r.bit];
      ++total;
    }
  }
  EXPECT_NEAR(static_cast<double>(layer0) / total, 0.4, 0.04);
  double chi2 = 0.0;
  const double expected = total / 6.0;
  for (int b = 0; b < 6; ++b) {
    chi2 += (per_bit[b] - expected) * (per_bit[b] - expected) / expected;
  }
  EXPECT_LT(chi2, 20.5);  // chi-square, 5 dof, p ~ 0.001
}

TEST(SelectGradientBits, RejectsEmptyBatch) {
  EXPECT_THROW(select_gradient_bits(random_qmodel(1, 8), Dataset{}, 3), Error);
}

TEST(SelectGradientBits, PicksLossRaisingSignFlipsByGradientMagnitude) {
  const QuantModel q = random_qmodel(4, 8);
  const Dataset batch = testing::random_dataset({2, 3, 3}, 3, 12, 5);
  const ModelGradient g = gradient(dequantize_model(q), batch);
  const auto picks = select_gradient_bits(q, batch, 10);
  ASSERT_EQ(picks.size(), 10u);
  EXPECT_EQ(picks, select_gradient_bits(q, batch, 10));
  double previous = INFINITY;
  for (const auto& r : picks) {
    const QuantLayer& l = q.layers[r.filter.layer];
    const std::size_t i = r.filter.filter * l.filter_size() + r.weight;
    const double grad = g.params[r.filter.layer].weights[i];
    const int delta = flip_bit(l.codes[i], 8, 7) - l.codes[i];
    EXPECT_EQ(r.bit, 7);
    EXPECT_GT(grad * delta, 0.0);
    EXPECT_LE(std::abs(grad), previous);
    previous = std::abs(grad);
  }
  // Flipping those bits raises the loss on the batch.
  EXPECT_GT(mean_loss(dequantize_model(apply_flips(q, picks)), batch),
            mean_loss(dequantize_model(q), batch));
}

TEST(SelectGradientBits, FillsFromSkippedWeightsWhenNeeded) {
  const QuantModel q = random_qmodel(6, 8);
  const Dataset batch = testing::random_dataset({2, 3, 3}, 3, 6, 7);
  const auto picks = select_gradient_bits(q, batch, q.total_weights());
  EXPECT_EQ(std::set<FlipRecord>(picks.begin(), picks.end()).size(),
            q.total_weights());
}

TEST(ApplyFlips, XorsVictimBitsAndIsAnInvolution) {
  const QuantModel v = random_qmodel(7, 8);
  const FlipRecord r{{1, 2}, 5, 3};
  const QuantModel once = apply_flips(v, std::span(&r, 1));
  const std::size_t i = 2 * v.layers[1].filter_size() + 5;
  EXPECT_EQ(code_to_pattern(once.layers[1].codes[i], 8),
            code_to_pattern(v.layers[1].codes[i], 8) ^ 0x08);
  const FlipRecord twice[] = {r, r};
  EXPECT_EQ(apply_flips(v, twice), v);
  EXPECT_EQ(apply_flips(once, std::span(&r, 1)), v);
}

TEST(ApplyFlips, RejectsOutOfRangeRecords) {
  const QuantModel v = random_qmodel(7, 4);
  for (const FlipRecord bad : {FlipRecord{{2, 0}, 0, 0}, FlipRecord{{0, 3}, 0, 0},
                               FlipRecord{{0, 0}, 8, 0}, FlipRecord{{0, 0}, 0, 4}}) {
    EXPECT_THROW(apply_flips(v, std::span(&bad, 1)), Error);
  }
}

TEST(RunAttack, TraceShapeAndAccuracyCurve) {
  const QuantModel v = random_qmodel(8, 8);
  const Dataset eval = testing::random_dataset({2, 3, 3}, 3, 30, 9);
  for (const RankingMethod ranking :
       {RankingMethod{FL2R{}}, RankingMethod{RandomBits{3}},
        RankingMethod{GradientBaseline{8}}}) {
    const AttackTrace t =
        run_attack(v, 0.8, 4, ranking, ReconstructionMethod::kCZR, 12, eval);
    ASSERT_EQ(t.flips.size(), 12u);
    ASSERT_EQ(t.accuracy.size(), 13u);
    EXPECT_EQ(t.accuracy[0], accuracy_quant(v, eval));
    for (std::size_t k = 0; k <= 12; ++k) {
      EXPECT_GE(t.accuracy[k], 0.0);
      EXPECT_LE(t.accuracy[k], 1.0);
      EXPECT_EQ(t.accuracy[k],
                accuracy_quant(apply_flips(v, std::span(t.flips).first(k)), eval));
    }
    EXPECT_EQ(t.config.ranking, ranking_name(ranking));
    EXPECT_EQ(t.config.recovery_rate, 0.8);
    EXPECT_EQ(t.config.n_flips, 12u);
  }
}

TEST(RunAttack, FullRecoveryMatchesWhiteBoxSelection) {
  const QuantModel v = random_qmodel(9, 6);
  const Dataset eval = testing::random_dataset({2, 3, 3}, 3, 5, 1);
  const auto direct = select_vulnerable_bits(v, 25);
  for (auto m : {ReconstructionMethod::kCZR, ReconstructionMethod::kAllZeros,
                 ReconstructionMethod::kAllOnes}) {
    EXPECT_EQ(run_attack(v, 1.0, 17, FL2R{}, m, 25, eval).flips, direct);
  }
}

TEST(RunAttack, RankingIgnoresHiddenVictimBits) {
  // Toggling bits the mask hides must not change the selected records.
  const QuantModel v = random_qmodel(10, 8);
  const Dataset eval = testing::random_dataset({2, 3, 3}, 3, 5, 1);
  const PartialModel p = simulate_recovery(v, 0.6, 33);
  QuantModel altered = v;
  for (std::size_t l = 0; l < v.layers.size(); ++l) {
    for (std::size_t i = 0; i < v.layers[l].codes.size(); ++i) {
      const auto hidden = static_cast<std::uint8_t>(~p.layers[l].masks[i]);
      altered.layers[l].codes[i] = static_cast<std::int8_t>(pattern_to_code(
          code_to_pattern(v.layers[l].codes[i], 8) ^ hidden, 8));
    }
  }
  ASSERT_NE(altered, v);
  for (const RankingMethod ranking :
       {RankingMethod{FL2R{}}, RankingMethod{GradientBaseline{5}}}) {
    EXPECT_EQ(run_attack(v, 0.6, 33, ranking, ReconstructionMethod::kCZR, 20, eval).flips,
              run_attack(altered, 0.6, 33, ranking, ReconstructionMethod::kCZR, 20, eval).flips);
  }
}

}  // namespace
}  // namespace bitsiege
