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

#include "bitsiege/architecture.h"

#include <string>

#include "bitsiege/error.h"

namespace bitsiege {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

bool is_parametric(const LayerSpec& layer) {
  return std::holds_alternative<Conv2D>(layer) ||
         std::holds_alternative<Dense>(layer);
}

Shape weight_shape(const LayerSpec& layer) {
  if (const auto* conv = std::get_if<Conv2D>(&layer)) {
    return {conv->c_out, conv->c_in, conv->kernel, conv->kernel};
  }
  if (const auto* dense = std::get_if<Dense>(&layer)) {
    return {dense->out_features, dense->in_features};
  }
  throw Error("layer has no weights");
}

Shape output_shape(const LayerSpec& layer, const Shape& input) {
  return std::visit(
      Overloaded{
          [&](const Conv2D& c) -> Shape {
            if (c.c_in == 0 || c.c_out == 0 || c.kernel == 0 || c.stride == 0) {
              throw ShapeError("conv2d dimensions must be positive");
            }
            if (input.size() != 3 || input[0] != c.c_in) {
              throw ShapeError("conv2d expects " + std::to_string(c.c_in) +
                               "xHxW input, got " + shape_string(input));
            }
            const std::size_t h = input[1] + 2 * c.padding;
            const std::size_t w = input[2] + 2 * c.padding;
            if (h < c.kernel || w < c.kernel) {
              throw ShapeError("conv2d kernel larger than padded input " +
                               shape_string(input));
            }
            return {c.c_out, (h - c.kernel) / c.stride + 1,
                    (w - c.kernel) / c.stride + 1};
          },
          [&](const Dense& d) -> Shape {
            if (d.in_features == 0 || d.out_features == 0) {
              throw ShapeError("dense dimensions must be positive");
            }
            if (input.size() != 1 || input[0] != d.in_features) {
              throw ShapeError("dense expects [" +
                               std::to_string(d.in_features) + "] input, got " +
                               shape_string(input));
            }
            return {d.out_features};
          },
          [&](const ReLU&) -> Shape { return input; },
          [&](const MaxPool& p) -> Shape {
            if (p.window == 0) throw ShapeError("maxpool window must be positive");
            if (input.size() != 3 || input[1] < p.window ||
                input[2] < p.window) {
              throw ShapeError("maxpool expects CxHxW input of at least the "
                               "window size, got " + shape_string(input));
            }
            return {input[0], input[1] / p.window, input[2] / p.window};
          },
          [&](const Flatten&) -> Shape { return {shape_size(input)}; },
      },
      layer);
}

std::vector<Shape> Architecture::activation_shapes() const {
  std::vector<Shape> shapes{input_shape};
  for (const auto& layer : layers) {
    shapes.push_back(output_shape(layer, shapes.back()));
  }
  return shapes;
}

void Architecture::validate() const {
  if (input_shape.empty()) throw ShapeError("architecture has no input shape");
  for (std::size_t d : input_shape) {
    if (d == 0) throw ShapeError("input dimensions must be positive");
  }
  if (num_classes == 0) throw ShapeError("class count must be positive");
  if (parametric_layers().empty()) {
    throw ShapeError("architecture needs at least one parametric layer");
  }
  const Shape out = activation_shapes().back();
  if (out.size() != 1 || out[0] != num_classes) {
    throw ShapeError("architecture output " + shape_string(out) +
                     " does not match " + std::to_string(num_classes) +
                     " classes");
  }
}

std::vector<std::size_t> Architecture::parametric_layers() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (is_parametric(layers[i])) out.push_back(i);
  }
  return out;
}

}  // namespace bitsiege
