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

#include "bitsiege/tensor.h"

#include <cmath>
#include <functional>
#include <numeric>
#include <utility>

#include "bitsiege/error.h"

namespace bitsiege {

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

Tensor::Tensor(Shape shape)
    : shape_(std::move(shape)), data_(shape_size(shape_), 0.0) {
  for (std::size_t d : shape_) {
    if (d == 0) throw ShapeError("tensor dimension must be positive");
  }
}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  for (std::size_t d : shape_) {
    if (d == 0) throw ShapeError("tensor dimension must be positive");
  }
  if (shape_size(shape_) != data_.size()) {
    throw ShapeError("tensor shape " + shape_string(shape_) + " needs " +
                     std::to_string(shape_size(shape_)) + " values, got " +
                     std::to_string(data_.size()));
  }
  for (double v : data_) {
    if (!std::isfinite(v)) throw Error("tensor value is not finite");
  }
}

Tensor Tensor::vector(std::initializer_list<double> values) {
  return Tensor({values.size()}, std::vector<double>(values));
}

Tensor Tensor::reshaped(Shape shape) const {
  if (shape_size(shape) != data_.size()) {
    throw ShapeError("cannot reshape " + shape_string(shape_) + " to " +
                     shape_string(shape));
  }
  Tensor out;
  out.shape_ = std::move(shape);
  out.data_ = data_;
  return out;
}

}  // namespace bitsiege
