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

#include "bitsiege/recovery.h"

#include <bit>
#include <random>
#include <string>

#include "bitsiege/error.h"

namespace bitsiege {

void PartialModel::validate() const {
  architecture.validate();
  const auto idx = architecture.parametric_layers();
  if (layers.size() != idx.size()) {
    throw ShapeError("partial model layer count does not match architecture");
  }
  for (std::size_t j = 0; j < layers.size(); ++j) {
    const PartialLayer& l = layers[j];
    check_bits(l.params.bits);
    if (!(l.params.scale > 0.0)) {
      throw Error("layer " + std::to_string(j) + " scale must be positive");
    }
    if (l.shape != weight_shape(architecture.layers[idx[j]]) ||
        l.codes.size() != shape_size(l.shape) ||
        l.masks.size() != l.codes.size()) {
      throw ShapeError("layer " + std::to_string(j) +
                       " code or mask shape mismatch");
    }
    const unsigned full = (1u << l.params.bits) - 1u;
    for (std::uint8_t m : l.masks) {
      if (m & ~full) throw Error("mask bit above the code width");
    }
  }
}

PartialModel simulate_recovery(const QuantModel& victim, double recovery_rate,
                               std::uint64_t seed) {
  if (!(recovery_rate >= 0.0 && recovery_rate <= 1.0)) {
    throw Error("recovery rate must lie in [0, 1]");
  }
  std::mt19937_64 rng(seed);
  PartialModel out{victim.architecture, {}};
  out.layers.reserve(victim.layers.size());
  for (const QuantLayer& v : victim.layers) {
    PartialLayer l{v.params, v.shape, {}, {}, v.bias};
    const int bits = v.params.bits;
    l.codes.reserve(v.codes.size());
    l.masks.reserve(v.codes.size());
    for (std::int8_t code : v.codes) {
      std::uint8_t mask = 0;
      for (int b = 0; b < bits; ++b) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        if (u < recovery_rate) mask |= static_cast<std::uint8_t>(1u << b);
      }
      const auto known =
          static_cast<std::uint8_t>(code_to_pattern(code, bits) & mask);
      l.codes.push_back(static_cast<std::int8_t>(pattern_to_code(known, bits)));
      l.masks.push_back(mask);
    }
    out.layers.push_back(std::move(l));
  }
  return out;
}

std::size_t recovered_bits(const PartialModel& model) {
  std::size_t n = 0;
  for (const auto& l : model.layers) {
    for (std::uint8_t m : l.masks) n += static_cast<std::size_t>(std::popcount(m));
  }
  return n;
}

std::size_t total_bits(const PartialModel& model) {
  std::size_t n = 0;
  for (const auto& l : model.layers) {
    n += l.masks.size() * static_cast<std::size_t>(l.params.bits);
  }
  return n;
}

double actual_recovery_rate(const PartialModel& model) {
  const std::size_t total = total_bits(model);
  if (total == 0) return 0.0;
  return static_cast<double>(recovered_bits(model)) /
         static_cast<double>(total);
}

}  // namespace bitsiege
