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

#include "bitsiege/quantization.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "bitsiege/error.h"

namespace bitsiege {

void check_bits(int bits) {
  if (bits < 1 || bits > kMaxBits) {
    throw Error("bit width " + std::to_string(bits) + " outside [1, 8]");
  }
}

int code_min(int bits) { return -(1 << (bits - 1)); }
int code_max(int bits) { return (1 << (bits - 1)) - 1; }

bool is_supported_bitwidth(int bits) {
  return bits == 4 || bits == 6 || bits == 8;
}

std::uint8_t code_to_pattern(int code, int bits) {
  return static_cast<std::uint8_t>(static_cast<unsigned>(code) &
                                   ((1u << bits) - 1u));
}

int pattern_to_code(std::uint8_t pattern, int bits) {
  const int low = pattern & ((1 << bits) - 1);
  return (low & (1 << (bits - 1))) ? low - (1 << bits) : low;
}

int flip_bit(int code, int bits, int position) {
  check_bits(bits);
  if (position < 0 || position >= bits) {
    throw Error("bit position " + std::to_string(position) +
                " outside [0, " + std::to_string(bits) + ")");
  }
  return pattern_to_code(
      static_cast<std::uint8_t>(code_to_pattern(code, bits) ^ (1u << position)),
      bits);
}

double compute_scale(std::span<const double> weights, int bits) {
  check_bits(bits);
  if (weights.empty()) throw Error("cannot compute scale of an empty tensor");
  double max_abs = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w)) throw Error("non-finite weight");
    max_abs = std::max(max_abs, std::abs(w));
  }
  if (max_abs == 0.0) return 1.0;
  return max_abs / code_max(bits);
}

int quantize(double w, double scale, int bits) {
  // std::round rounds halves away from zero.
  const double q = std::round(w / scale);
  return static_cast<int>(std::clamp(q, static_cast<double>(code_min(bits)),
                                     static_cast<double>(code_max(bits))));
}

double dequantize(int code, double scale) { return code * scale; }

std::size_t QuantLayer::filter_size() const {
  return shape.empty() ? 0 : codes.size() / shape[0];
}

Tensor QuantLayer::dequantized_weights() const {
  std::vector<double> values(codes.size());
  for (std::size_t i = 0; i < codes.size(); ++i) {
    values[i] = dequantize(codes[i], params.scale);
  }
  return Tensor(shape, std::move(values));
}

void QuantModel::validate() const {
  architecture.validate();
  const auto idx = architecture.parametric_layers();
  if (layers.size() != idx.size()) {
    throw ShapeError("quantized model layer count does not match "
                     "architecture");
  }
  for (std::size_t j = 0; j < layers.size(); ++j) {
    const QuantLayer& l = layers[j];
    check_bits(l.params.bits);
    if (!(l.params.scale > 0.0) || !std::isfinite(l.params.scale)) {
      throw Error("layer " + std::to_string(j) + " scale must be positive");
    }
    const Shape expected = weight_shape(architecture.layers[idx[j]]);
    if (l.shape != expected || l.codes.size() != shape_size(expected)) {
      throw ShapeError("layer " + std::to_string(j) + " code shape " +
                       shape_string(l.shape) + ", expected " +
                       shape_string(expected));
    }
    if (l.bias.shape() != Shape{expected[0]}) {
      throw ShapeError("layer " + std::to_string(j) + " bias shape mismatch");
    }
    for (std::int8_t c : l.codes) {
      if (c < code_min(l.params.bits) || c > code_max(l.params.bits)) {
        throw Error("layer " + std::to_string(j) + " code " +
                    std::to_string(c) + " outside the " +
                    std::to_string(l.params.bits) + "-bit range");
      }
    }
  }
}

std::size_t QuantModel::total_weights() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.codes.size();
  return n;
}

std::size_t QuantModel::total_weight_bits() const {
  std::size_t n = 0;
  for (const auto& l : layers) {
    n += l.codes.size() * static_cast<std::size_t>(l.params.bits);
  }
  return n;
}

QuantModel quantize_model(const FloatModel& model, int bits) {
  if (!is_supported_bitwidth(bits)) {
    throw Error("unsupported bit width " + std::to_string(bits) +
                " (expected 4, 6 or 8)");
  }
  model.validate();
  QuantModel q{model.architecture, {}};
  for (const ParamLayer& p : model.params) {
    QuantLayer l;
    l.params = {bits, compute_scale(p.weights.data(), bits)};
    l.shape = p.weights.shape();
    l.codes.reserve(p.weights.size());
    for (double w : p.weights.data()) {
      l.codes.push_back(
          static_cast<std::int8_t>(quantize(w, l.params.scale, bits)));
    }
    l.bias = p.bias;
    q.layers.push_back(std::move(l));
  }
  return q;
}

FloatModel dequantize_model(const QuantModel& model) {
  FloatModel f{model.architecture, {}};
  f.params.reserve(model.layers.size());
  for (const QuantLayer& l : model.layers) {
    f.params.push_back({l.dequantized_weights(), l.bias});
  }
  return f;
}

std::vector<double> forward_quant(const QuantModel& model,
                                  const Tensor& input) {
  return forward(dequantize_model(model), input);
}

double accuracy_quant(const QuantModel& model, const Dataset& data) {
  return accuracy(dequantize_model(model), data);
}

}  // namespace bitsiege
