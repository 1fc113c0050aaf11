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

#ifndef BITSIEGE_TESTS_TEST_UTIL_H_
#define BITSIEGE_TESTS_TEST_UTIL_H_

#include <cstdint>
#include <random>
#include <vector>

#include "bitsiege/model.h"
#include "bitsiege/quantization.h"

namespace bitsiege::testing {

inline Tensor random_tensor(const Shape& shape, std::mt19937_64& rng,
                            double stddev = 1.0) {
  std::normal_distribution<double> dist(0.0, stddev);
  std::vector<double> data(shape_size(shape));
  for (double& v : data) v = dist(rng);
  return Tensor(shape, std::move(data));
}

inline FloatModel random_model(const Architecture& arch, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  FloatModel m{arch, {}};
  for (std::size_t idx : arch.parametric_layers()) {
    const Shape s = weight_shape(arch.layers[idx]);
    m.params.push_back({random_tensor(s, rng, 0.5), random_tensor({s[0]}, rng, 0.1)});
  }
  return m;
}

/// Conv(2->3,K2) ReLU Flatten Dense(->3) on 2x3x3 inputs.
inline Architecture small_architecture() {
  return Architecture{{2, 3, 3}, 3, {Conv2D{2, 3, 2}, ReLU{}, Flatten{}, Dense{12, 3}}};
}

inline Dataset random_dataset(const Shape& shape, std::size_t classes,
                              std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Dataset d;
  for (std::size_t i = 0; i < n; ++i) {
    d.inputs.push_back(random_tensor(shape, rng));
    d.labels.push_back(i % classes);
  }
  return d;
}

/// Single Dense(in -> out) layer quantized model with the given codes.
inline QuantModel dense_qmodel(std::size_t in, std::size_t out,
                               std::vector<std::int8_t> codes, double scale,
                               int bits = 8) {
  QuantModel q{Architecture{{in}, out, {Dense{in, out}}}, {}};
  q.layers.push_back({{bits, scale}, {out, in}, std::move(codes), Tensor({out})});
  return q;
}

}  // namespace bitsiege::testing

#endif  // BITSIEGE_TESTS_TEST_UTIL_H_
