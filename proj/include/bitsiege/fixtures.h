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

#ifndef BITSIEGE_FIXTURES_H_
#define BITSIEGE_FIXTURES_H_

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "bitsiege/architecture.h"
#include "bitsiege/model.h"

namespace bitsiege {

struct SynthSpec {
  std::size_t num_classes = 4;
  std::size_t samples_per_class = 200;
  Shape input_shape = {1, 8, 8};
  double noise_stddev = 0.3;
  std::uint64_t seed = 1;
};

struct TrainConfig {
  std::size_t epochs = 20;
  double learning_rate = 0.05;
  std::size_t batch_size = 16;
  /// L1 penalty on weights (not biases), applied as a subgradient step.
  double l1 = 0.0;
  std::uint64_t seed = 1;
};

struct SplitData {
  Dataset train;
  Dataset test;
};

/// Prototype-plus-noise data. Prototypes are Gram-Schmidt orthonormalized
/// Gaussian patterns scaled to unit RMS; train and test are independent
/// draws of `samples_per_class` samples per class.
SplitData gen_synthetic(const SynthSpec& spec);

/// Per-parameter gradients of the mean cross-entropy over a batch.
struct ModelGradient {
  double loss = 0.0;
  std::vector<ParamLayer> params;
};

double cross_entropy(std::span<const double> logits, std::size_t label);

/// Mean cross-entropy over `batch`. Throws Error on an empty batch.
double mean_loss(const FloatModel& model, const Dataset& batch);

/// Backprop of mean_loss. Throws Error on an empty batch.
ModelGradient gradient(const FloatModel& model, const Dataset& batch);

/// Smallest distance of the forward pass from a point where the loss is not
/// differentiable: |x| over every ReLU input, and the gap between the two
/// largest positive values of every max-pool window.
double kink_margin(const FloatModel& model, const Dataset& batch);

struct GradientCheck {
  double max_relative_error = 0.0;
  std::size_t parameters = 0;
};

/// Central differences with step `h` against gradient(), over every weight
/// and bias. Relative error uses max(|fd|, |analytic|, 1e-8) as denominator.
GradientCheck finite_difference_check(FloatModel model, const Dataset& batch,
                                      double h = 1e-3);

/// A randomly initialized model (biases ~ N(0, 0.1^2)) plus a standard-normal
/// batch whose kink_margin exceeds `margin`. Seeds seed, seed+1, ... are
/// tried in order; throws Error after 1000 attempts.
std::pair<FloatModel, Dataset> smooth_gradient_fixture(
    const Architecture& architecture, std::size_t batch_size,
    std::uint64_t seed, double margin = 0.01);

/// He-normal weights, zero biases.
FloatModel init_model(const Architecture& architecture, std::uint64_t seed);

/// Minibatch SGD on cross-entropy. Final weights are rounded to float32 so
/// the result survives the model file format unchanged. Throws Error naming
/// the epoch if the loss becomes non-finite.
/// Mean loss per epoch is appended to `epoch_losses` when given.
FloatModel train(const Architecture& architecture, const Dataset& data,
                 const TrainConfig& config,
                 std::vector<double>* epoch_losses = nullptr);

/// Conv(1->8,K3) ReLU MaxPool(2) Conv(8->16,K3) ReLU Flatten Dense(->classes).
Architecture desk_architecture(std::size_t num_classes = 4);
SynthSpec desk_synth_spec();
TrainConfig desk_train_config();

}  // namespace bitsiege

#endif  // BITSIEGE_FIXTURES_H_
