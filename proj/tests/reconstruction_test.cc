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

#include <random>

#include "bitsiege/reconstruction.h"
#include "bitsiege/recovery.h"
#include "test_util.h"

namespace bitsiege {
namespace {

constexpr ReconstructionMethod kAll[] = {ReconstructionMethod::kCZR,
                                         ReconstructionMethod::kAllZeros,
                                         ReconstructionMethod::kAllOnes};

int czr(std::uint8_t pattern, std::uint8_t mask, int bits = 8) {
  return reconstruct_code({pattern, mask, bits}, ReconstructionMethod::kCZR);
}

TEST(CZR, KnownSignExamples) {
  EXPECT_EQ(czr(0x00, 0x80), 0);   // sign 0 -> 00000000
  EXPECT_EQ(czr(0x80, 0x80), -1);  // sign 1 -> 11111111
}

TEST(CZR, UnknownSignExamples) {
  EXPECT_EQ(czr(0x00, 0x00), 0);
  // Bit 3 known as 1: candidates 00001000 = 8 and 11111111 = -1.
  EXPECT_EQ(czr(0x08, 0x08), -1);
  // nq=4, bit 1 known as 1: candidates 0010 = 2 and 1111 = -1.
  EXPECT_EQ(czr(0x2, 0x2, 4), -1);
  // nq=4, bits 0 and 1 known as 0: candidates 0 and 1100 = -4.
  EXPECT_EQ(czr(0x0, 0x3, 4), 0);
}

TEST(CZR, TieGoesToNonNegative) {
  // nq=4, bit 0 known 0 and bit 1 known 1: candidates 0010 = 2, 1110 = -2.
  EXPECT_EQ(czr(0x2, 0x3, 4), 2);
  EXPECT_EQ(oracle_min_abs({0x2, 0x3, 4}), 2);
}

TEST(Oracle, Examples) {
  for (int c = -128; c < 128; ++c) {
    EXPECT_EQ(oracle_min_abs({code_to_pattern(c, 8), 0xFF, 8}), c);
  }
  EXPECT_EQ(oracle_min_abs({0, 0, 4}), 0);
  // nq=4, only bit 1 known = 1: completions 0010, 0011, 0110, 0111, 1010,
  // 1011, 1110, 1111 -> values 2 3 6 7 -6 -5 -2 -1; minimum |v| is -1.
  EXPECT_EQ(oracle_min_abs({0x2, 0x2, 4}), -1);
}

TEST(CZR, EqualsOracleExhaustively) {
  for (int bits : {4, 6, 8}) {
    for (unsigned p = 0; p < (1u << bits); ++p) {
      for (unsigned m = 0; m < (1u << bits); ++m) {
        const PartialCode pc{static_cast<std::uint8_t>(p),
                             static_cast<std::uint8_t>(m), bits};
        ASSERT_EQ(reconstruct_code(pc, ReconstructionMethod::kCZR),
                  oracle_min_abs(pc))
            << "bits=" << bits << " pattern=" << p << " mask=" << m;
      }
    }
  }
}

TEST(Reconstruct, FillConventions) {
  EXPECT_EQ(reconstruct_code({0, 0, 8}, ReconstructionMethod::kAllZeros), 0);
  EXPECT_EQ(reconstruct_code({0, 0, 8}, ReconstructionMethod::kAllOnes), -1);
  EXPECT_EQ(reconstruct_code({0, 0, 4}, ReconstructionMethod::kAllOnes), -1);
  // Known 0 sign with ones elsewhere: 01111111.
  EXPECT_EQ(reconstruct_code({0x00, 0x80, 8}, ReconstructionMethod::kAllOnes), 127);
  EXPECT_EQ(reconstruct_code({0x80, 0x80, 8}, ReconstructionMethod::kAllZeros), -128);
}

TEST(Reconstruct, KnownBitsPreservedFuzz) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 20000; ++trial) {
    const int bits = 4 + 2 * static_cast<int>(rng() % 3);
    const auto full = static_cast<std::uint8_t>((1u << bits) - 1);
    const auto pattern = static_cast<std::uint8_t>(rng() & full);
    const auto mask = static_cast<std::uint8_t>(rng() & full);
    for (auto method : kAll) {
      const int c = reconstruct_code({pattern, mask, bits}, method);
      ASSERT_GE(c, code_min(bits));
      ASSERT_LE(c, code_max(bits));
      ASSERT_EQ(code_to_pattern(c, bits) & mask, pattern & mask);
    }
  }
}

TEST(ReconstructModel, FullRecoveryIsIdentity) {
  for (int bits : {4, 6, 8}) {
    const QuantModel v = quantize_model(
        testing::random_model(testing::small_architecture(), 10 + bits), bits);
    const PartialModel p = simulate_recovery(v, 1.0, 1);
    for (auto method : kAll) EXPECT_EQ(reconstruct_model(p, method), v);
  }
}

TEST(ReconstructModel, FullyUnknownWeights) {
  const QuantModel v = quantize_model(
      testing::random_model(testing::small_architecture(), 4), 8);
  const PartialModel p = simulate_recovery(v, 0.0, 1);
  for (const auto& l : reconstruct_model(p, ReconstructionMethod::kAllZeros).layers) {
    for (auto c : l.codes) EXPECT_EQ(c, 0);
  }
  for (const auto& l : reconstruct_model(p, ReconstructionMethod::kAllOnes).layers) {
    for (auto c : l.codes) EXPECT_EQ(c, -1);
  }
  for (const auto& l : reconstruct_model(p, ReconstructionMethod::kCZR).layers) {
    for (auto c : l.codes) EXPECT_EQ(c, 0);
  }
}

TEST(ReconstructModel, PassesMetadataThrough) {
  const QuantModel v = quantize_model(
      testing::random_model(testing::small_architecture(), 4), 6);
  const QuantModel r =
      reconstruct_model(simulate_recovery(v, 0.4, 2), ReconstructionMethod::kCZR);
  EXPECT_EQ(r.architecture, v.architecture);
  for (std::size_t l = 0; l < v.layers.size(); ++l) {
    EXPECT_EQ(r.layers[l].params, v.layers[l].params);
    EXPECT_EQ(r.layers[l].bias, v.layers[l].bias);
  }
}

TEST(ReconstructionMethod, NamesRoundTrip) {
  for (auto method : kAll) {
    EXPECT_EQ(parse_reconstruction(to_string(method)), method);
  }
  EXPECT_FALSE(parse_reconstruction("median").has_value());
}

}  // namespace
}  // namespace bitsiege
