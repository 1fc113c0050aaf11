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

#include "bitsiege/reconstruction.h"

#include <cstdlib>

#include "bitsiege/error.h"

namespace bitsiege {

std::string_view to_string(ReconstructionMethod method) {
  switch (method) {
    case ReconstructionMethod::kCZR:
      return "czr";
    case ReconstructionMethod::kAllZeros:
      return "allzeros";
    case ReconstructionMethod::kAllOnes:
      return "allones";
  }
  return "unknown";
}

std::optional<ReconstructionMethod> parse_reconstruction(std::string_view name) {
  if (name == "czr") return ReconstructionMethod::kCZR;
  if (name == "allzeros") return ReconstructionMethod::kAllZeros;
  if (name == "allones") return ReconstructionMethod::kAllOnes;
  return std::nullopt;
}

namespace {

int fill(const PartialCode& code, bool ones) {
  const unsigned full = (1u << code.bits) - 1u;
  const unsigned known = code.pattern & code.mask & full;
  const unsigned unknown = ~code.mask & full;
  return pattern_to_code(
      static_cast<std::uint8_t>(ones ? (known | unknown) : known), code.bits);
}

}  // namespace

int reconstruct_code(const PartialCode& code, ReconstructionMethod method) {
  check_bits(code.bits);
  switch (method) {
    case ReconstructionMethod::kAllZeros:
      return fill(code, false);
    case ReconstructionMethod::kAllOnes:
      return fill(code, true);
    case ReconstructionMethod::kCZR:
      break;
  }
  const unsigned sign = 1u << (code.bits - 1);
  if (code.mask & sign) return fill(code, (code.pattern & sign) != 0);
  // Sign unknown: zeros are the smallest completion with sign 0, ones the
  // completion closest to zero with sign 1.
  PartialCode with_sign = code;
  with_sign.mask = static_cast<std::uint8_t>(code.mask | sign);
  with_sign.pattern = static_cast<std::uint8_t>(code.pattern & ~sign);
  const int positive = fill(with_sign, false);
  with_sign.pattern = static_cast<std::uint8_t>(code.pattern | sign);
  const int negative = fill(with_sign, true);
  return std::abs(negative) < std::abs(positive) ? negative : positive;
}

int oracle_min_abs(const PartialCode& code) {
  check_bits(code.bits);
  const unsigned full = (1u << code.bits) - 1u;
  const unsigned mask = code.mask & full;
  const unsigned known = code.pattern & mask;
  bool found = false;
  int best = 0;
  for (unsigned p = 0; p <= full; ++p) {
    if ((p & mask) != known) continue;
    const int v = pattern_to_code(static_cast<std::uint8_t>(p), code.bits);
    // Patterns ascend, so the first of equal candidates has the smaller
    // pattern.
    if (!found || std::abs(v) < std::abs(best) ||
        (std::abs(v) == std::abs(best) && v >= 0 && best < 0)) {
      best = v;
      found = true;
    }
  }
  return best;
}

QuantModel reconstruct_model(const PartialModel& model,
                             ReconstructionMethod method) {
  QuantModel out{model.architecture, {}};
  out.layers.reserve(model.layers.size());
  for (const PartialLayer& p : model.layers) {
    QuantLayer l{p.params, p.shape, {}, p.bias};
    l.codes.reserve(p.codes.size());
    for (std::size_t i = 0; i < p.codes.size(); ++i) {
      const PartialCode pc{code_to_pattern(p.codes[i], p.params.bits),
                           p.masks[i], p.params.bits};
      l.codes.push_back(static_cast<std::int8_t>(reconstruct_code(pc, method)));
    }
    out.layers.push_back(std::move(l));
  }
  return out;
}

}  // namespace bitsiege
