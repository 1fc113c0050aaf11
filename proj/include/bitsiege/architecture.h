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

#ifndef BITSIEGE_ARCHITECTURE_H_
#define BITSIEGE_ARCHITECTURE_H_

#include <cstddef>
#include <variant>
#include <vector>

#include "bitsiege/tensor.h"

namespace bitsiege {

struct Conv2D {
  std::size_t c_in = 0;
  std::size_t c_out = 0;
  std::size_t kernel = 0;
  std::size_t stride = 1;
  std::size_t padding = 0;
  bool operator==(const Conv2D&) const = default;
};

struct Dense {
  std::size_t in_features = 0;
  std::size_t out_features = 0;
  bool operator==(const Dense&) const = default;
};

struct ReLU {
  bool operator==(const ReLU&) const = default;
};

/// Non-overlapping max pooling: stride equals window, trailing rows and
/// columns that do not fill a window are dropped.
struct MaxPool {
  std::size_t window = 2;
  bool operator==(const MaxPool&) const = default;
};

struct Flatten {
  bool operator==(const Flatten&) const = default;
};

using LayerSpec = std::variant<Conv2D, Dense, ReLU, MaxPool, Flatten>;

bool is_parametric(const LayerSpec& layer);

/// Weight tensor shape of a parametric layer: C_out x C_in x K x K or out x in.
Shape weight_shape(const LayerSpec& layer);

/// Output shape of `layer` applied to `input`; throws ShapeError if they do
/// not compose.
Shape output_shape(const LayerSpec& layer, const Shape& input);

struct Architecture {
  Shape input_shape;
  std::size_t num_classes = 0;
  std::vector<LayerSpec> layers;

  /// Throws ShapeError unless the layers compose from `input_shape` to a
  /// vector of `num_classes` and at least one layer is parametric.
  void validate() const;

  /// Shapes of every activation: element 0 is the input, element i+1 the
  /// output of layer i.
  std::vector<Shape> activation_shapes() const;

  /// Indices into `layers` of the Conv2D and Dense layers, in order.
  std::vector<std::size_t> parametric_layers() const;

  bool operator==(const Architecture&) const = default;
};

}  // namespace bitsiege

#endif  // BITSIEGE_ARCHITECTURE_H_
