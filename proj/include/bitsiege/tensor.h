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

#ifndef BITSIEGE_TENSOR_H_
#define BITSIEGE_TENSOR_H_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace bitsiege {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

/// Dense row-major array of finite reals.
class Tensor {
 public:
  Tensor() = default;
  /// Zero-filled tensor.
  explicit Tensor(Shape shape);
  /// Throws ShapeError if the element count disagrees with `shape`, Error on
  /// non-finite values.
  Tensor(Shape shape, std::vector<double> data);

  static Tensor vector(std::initializer_list<double> values);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& operator[](std::size_t i) { return data_[i]; }

  /// Same data, new shape of equal size.
  Tensor reshaped(Shape shape) const;

  bool operator==(const Tensor&) const = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

}  // namespace bitsiege

#endif  // BITSIEGE_TENSOR_H_
