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

#ifndef BITSIEGE_LAYERS_H_
#define BITSIEGE_LAYERS_H_

#include <vector>

#include "bitsiege/architecture.h"
#include "bitsiege/model.h"
#include "bitsiege/tensor.h"

// Per-layer forward and backward kernels. Plain reference loops; shapes are
// assumed already validated against the architecture.

namespace bitsiege {

Tensor conv2d_forward(const Conv2D& spec, const Tensor& input,
                      const Tensor& weights, const Tensor& bias);
Tensor dense_forward(const Dense& spec, const Tensor& input,
                     const Tensor& weights, const Tensor& bias);
Tensor relu_forward(const Tensor& input);
Tensor maxpool_forward(const MaxPool& spec, const Tensor& input);

struct ParamGrad {
  Tensor input;
  Tensor weights;
  Tensor bias;
};

ParamGrad conv2d_backward(const Conv2D& spec, const Tensor& input,
                          const Tensor& weights, const Tensor& grad_output);
ParamGrad dense_backward(const Dense& spec, const Tensor& input,
                         const Tensor& weights, const Tensor& grad_output);
Tensor relu_backward(const Tensor& input, const Tensor& grad_output);
Tensor maxpool_backward(const MaxPool& spec, const Tensor& input,
                        const Tensor& grad_output);

/// Every intermediate activation of a forward pass: element 0 is the input,
/// element i+1 the output of layer i.
std::vector<Tensor> forward_activations(const FloatModel& model,
                                        const Tensor& input);

}  // namespace bitsiege

#endif  // BITSIEGE_LAYERS_H_
