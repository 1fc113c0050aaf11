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

#ifndef BITSIEGE_RECONSTRUCTION_H_
#define BITSIEGE_RECONSTRUCTION_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "bitsiege/quantization.h"
#include "bitsiege/recovery.h"

namespace bitsiege {

enum class ReconstructionMethod { kCZR, kAllZeros, kAllOnes };

std::string_view to_string(ReconstructionMethod method);
std::optional<ReconstructionMethod> parse_reconstruction(std::string_view name);

/// A code whose bits are only partly known.
struct PartialCode {
  std::uint8_t pattern = 0;  // values of the known bits
  std::uint8_t mask = 0;     // set where known
  int bits = 8;
};

/// Fills the unknown bits of `code`. Known bits are kept.
///
/// CZR picks the completion closest to zero: zeros under a known 0 sign,
/// ones under a known 1 sign, and when the sign is unknown the smaller
/// magnitude of the two candidates, preferring the non-negative one on a tie.
int reconstruct_code(const PartialCode& code, ReconstructionMethod method);

QuantModel reconstruct_model(const PartialModel& model,
                             ReconstructionMethod method);

/// Exhaustive search over every completion of `code` for the smallest
/// |value|; ties go to the non-negative value, then the smaller pattern.
int oracle_min_abs(const PartialCode& code);

}  // namespace bitsiege

#endif  // BITSIEGE_RECONSTRUCTION_H_
