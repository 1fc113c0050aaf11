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

#ifndef BITSIEGE_RECOVERY_H_
#define BITSIEGE_RECOVERY_H_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "bitsiege/architecture.h"
#include "bitsiege/quantization.h"

namespace bitsiege {

/// A layer as seen by the attacker after extraction. Bit i of `masks[k]` is
/// set when bit i of weight k was recovered. Unrecovered bits of `codes`
/// are zero in the stored pattern and must not be interpreted.
struct PartialLayer {
  QuantParams params;
  Shape shape;
  std::vector<std::int8_t> codes;
  std::vector<std::uint8_t> masks;
  Tensor bias;

  bool operator==(const PartialLayer&) const = default;
};

struct PartialModel {
  Architecture architecture;
  std::vector<PartialLayer> layers;

  void validate() const;
  bool operator==(const PartialModel&) const = default;
};

/// Marks each weight bit recovered independently with probability
/// `recovery_rate`. Draws come from a std::mt19937_64 seeded with `seed`,
/// consumed one 64-bit word per bit in layer, weight, bit order (LSB first);
/// a bit is recovered iff (word >> 11) * 2^-53 < recovery_rate.
/// Architecture, scales and biases are copied verbatim.
PartialModel simulate_recovery(const QuantModel& victim, double recovery_rate,
                               std::uint64_t seed);

std::size_t recovered_bits(const PartialModel& model);
std::size_t total_bits(const PartialModel& model);
double actual_recovery_rate(const PartialModel& model);

}  // namespace bitsiege

#endif  // BITSIEGE_RECOVERY_H_
