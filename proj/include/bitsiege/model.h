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

#ifndef BITSIEGE_MODEL_H_
#define BITSIEGE_MODEL_H_

#include <cstddef>
#include <vector>

#include "bitsiege/architecture.h"
#include "bitsiege/tensor.h"

namespace bitsiege {

struct ParamLayer {
  Tensor weights;
  Tensor bias;
  bool operator==(const ParamLayer&) const = default;
};

/// Real-valued model. `params[j]` belongs to the j-th parametric layer of
/// the architecture.
struct FloatModel {
  Architecture architecture;
  std::vector<ParamLayer> params;

  /// Throws ShapeError if parameter shapes disagree with the architecture.
  void validate() const;

  bool operator==(const FloatModel&) const = default;
};

struct Dataset {
  std::vector<Tensor> inputs;
  std::vector<std::size_t> labels;

  std::size_t size() const { return inputs.size(); }
  bool empty() const { return inputs.empty(); }

  /// Throws unless lengths agree, every input has `input_shape` and every
  /// label is below `num_classes`.
  void validate(const Shape& input_shape, std::size_t num_classes) const;

  /// Samples [begin, begin + count), clipped to the dataset end.
  Dataset slice(std::size_t begin, std::size_t count) const;
};

/// Logits for one input. Throws ShapeError on input shape mismatch.
std::vector<double> forward(const FloatModel& model, const Tensor& input);

/// Index of the largest element; ties go to the lowest index.
std::size_t argmax(std::span<const double> values);

/// Fraction of samples whose argmax logit equals the label. Throws Error on
/// an empty dataset.
double accuracy(const FloatModel& model, const Dataset& data);

}  // namespace bitsiege

#endif  // BITSIEGE_MODEL_H_
