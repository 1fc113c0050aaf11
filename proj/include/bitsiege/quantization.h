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

#ifndef BITSIEGE_QUANTIZATION_H_
#define BITSIEGE_QUANTIZATION_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "bitsiege/architecture.h"
#include "bitsiege/model.h"
#include "bitsiege/tensor.h"

namespace bitsiege {

// Codes are N-bit two's-complement integers held in an int8. Bit 0 is the
// LSB and bit N-1 the sign bit; the int8 value is the sign-extended code.

inline constexpr int kMaxBits = 8;

int code_min(int bits);
int code_max(int bits);

/// Throws Error unless 1 <= bits <= 8.
void check_bits(int bits);

/// The low `bits` bits of `code`.
std::uint8_t code_to_pattern(int code, int bits);
/// Sign-extends an N-bit pattern; bits above N are ignored.
int pattern_to_code(std::uint8_t pattern, int bits);

/// Toggles bit `position`. Throws Error if position is outside [0, bits).
int flip_bit(int code, int bits, int position);

struct QuantParams {
  int bits = 8;
  double scale = 1.0;
  bool operator==(const QuantParams&) const = default;
};

/// Bit widths accepted for model quantization.
bool is_supported_bitwidth(int bits);

/// max|w| / (2^(bits-1) - 1), or 1 for an all-zero tensor.
double compute_scale(std::span<const double> weights, int bits);

/// clamp(round_half_away_from_zero(w / scale)) into the code range.
int quantize(double w, double scale, int bits);
double dequantize(int code, double scale);

struct QuantLayer {
  QuantParams params;
  Shape shape;
  std::vector<std::int8_t> codes;
  Tensor bias;

  std::size_t num_filters() const { return shape.empty() ? 0 : shape[0]; }
  std::size_t filter_size() const;
  Tensor dequantized_weights() const;

  bool operator==(const QuantLayer&) const = default;
};

struct QuantModel {
  Architecture architecture;
  std::vector<QuantLayer> layers;

  /// Throws unless codes are in range, scales positive and shapes match.
  void validate() const;

  std::size_t total_weights() const;
  /// Sum over layers of weights x bit width.
  std::size_t total_weight_bits() const;

  bool operator==(const QuantModel&) const = default;
};

QuantModel quantize_model(const FloatModel& model, int bits);

/// Float model whose weights are code x scale; biases pass through.
FloatModel dequantize_model(const QuantModel& model);

/// Equal to forward(dequantize_model(model), input).
std::vector<double> forward_quant(const QuantModel& model, const Tensor& input);
double accuracy_quant(const QuantModel& model, const Dataset& data);

}  // namespace bitsiege

#endif  // BITSIEGE_QUANTIZATION_H_
