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

#include "bitsiege/model.h"

#include <algorithm>
#include <string>

#include "bitsiege/error.h"
#include "bitsiege/layers.h"

namespace bitsiege {

void FloatModel::validate() const {
  architecture.validate();
  const auto idx = architecture.parametric_layers();
  if (params.size() != idx.size()) {
    throw ShapeError("model has " + std::to_string(params.size()) +
                     " parameter layers, architecture needs " +
                     std::to_string(idx.size()));
  }
  for (std::size_t j = 0; j < idx.size(); ++j) {
    const Shape expected = weight_shape(architecture.layers[idx[j]]);
    if (params[j].weights.shape() != expected) {
      throw ShapeError("layer " + std::to_string(idx[j]) + " weights " +
                       shape_string(params[j].weights.shape()) +
                       ", expected " + shape_string(expected));
    }
    if (params[j].bias.shape() != Shape{expected[0]}) {
      throw ShapeError("layer " + std::to_string(idx[j]) + " bias " +
                       shape_string(params[j].bias.shape()) + ", expected [" +
                       std::to_string(expected[0]) + "]");
    }
  }
}

void Dataset::validate(const Shape& input_shape,
                       std::size_t num_classes) const {
  if (inputs.size() != labels.size()) {
    throw ShapeError("dataset has " + std::to_string(inputs.size()) +
                     " inputs but " + std::to_string(labels.size()) +
                     " labels");
  }
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (inputs[i].shape() != input_shape) {
      throw ShapeError("sample " + std::to_string(i) + " has shape " +
                       shape_string(inputs[i].shape()) + ", expected " +
                       shape_string(input_shape));
    }
    if (labels[i] >= num_classes) {
      throw Error("sample " + std::to_string(i) + " label " +
                  std::to_string(labels[i]) + " out of range");
    }
  }
}

Dataset Dataset::slice(std::size_t begin, std::size_t count) const {
  Dataset out;
  const std::size_t end = std::min(inputs.size(), begin + count);
  for (std::size_t i = begin; i < end; ++i) {
    out.inputs.push_back(inputs[i]);
    out.labels.push_back(labels[i]);
  }
  return out;
}

std::vector<double> forward(const FloatModel& model, const Tensor& input) {
  auto acts = forward_activations(model, input);
  const auto logits = acts.back().data();
  return {logits.begin(), logits.end()};
}

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

double accuracy(const FloatModel& model, const Dataset& data) {
  if (data.empty()) throw Error("accuracy of an empty dataset");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (argmax(forward(model, data.inputs[i])) == data.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

}  // namespace bitsiege
