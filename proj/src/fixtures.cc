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

#include "bitsiege/fixtures.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <variant>

#include "bitsiege/error.h"
#include "bitsiege/layers.h"

namespace bitsiege {

SplitData gen_synthetic(const SynthSpec& spec) {
  if (spec.num_classes == 0 || spec.samples_per_class == 0) {
    throw Error("synthetic data needs positive class and sample counts");
  }
  if (!(spec.noise_stddev >= 0.0)) throw Error("noise must be non-negative");
  const std::size_t dim = shape_size(spec.input_shape);

  std::mt19937_64 proto_rng(spec.seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  std::vector<std::vector<double>> protos(spec.num_classes,
                                          std::vector<double>(dim));
  for (std::size_t c = 0; c < spec.num_classes; ++c) {
    auto& p = protos[c];
    for (double& v : p) v = unit(proto_rng);
    // Orthogonalize against earlier prototypes while the dimension allows.
    if (c < dim) {
      for (std::size_t q = 0; q < c; ++q) {
        const double dot =
            std::inner_product(p.begin(), p.end(), protos[q].begin(), 0.0);
        for (std::size_t i = 0; i < dim; ++i) {
          p[i] -= dot / static_cast<double>(dim) * protos[q][i];
        }
      }
    }
    const double norm = std::sqrt(std::inner_product(p.begin(), p.end(),
                                                     p.begin(), 0.0));
    for (double& v : p) v *= std::sqrt(static_cast<double>(dim)) / norm;
  }

  auto draw = [&](std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(spec.seed),
                      static_cast<std::uint32_t>(spec.seed >> 32),
                      static_cast<std::uint32_t>(stream)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> noise(0.0, 1.0);
    Dataset d;
    const std::size_t n = spec.num_classes * spec.samples_per_class;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t label = i % spec.num_classes;
      std::vector<double> x = protos[label];
      if (spec.noise_stddev > 0.0) {
        for (double& v : x) v += spec.noise_stddev * noise(rng);
      }
      d.inputs.emplace_back(spec.input_shape, std::move(x));
      d.labels.push_back(label);
    }
    return d;
  };
  return {draw(1), draw(2)};
}

double cross_entropy(std::span<const double> logits, std::size_t label) {
  const double m = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double z : logits) sum += std::exp(z - m);
  return std::log(sum) + m - logits[label];
}

double mean_loss(const FloatModel& model, const Dataset& batch) {
  if (batch.empty()) throw Error("loss of an empty batch");
  double total = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    total += cross_entropy(forward(model, batch.inputs[i]), batch.labels[i]);
  }
  return total / static_cast<double>(batch.size());
}

ModelGradient gradient(const FloatModel& model, const Dataset& batch) {
  if (batch.empty()) throw Error("gradient of an empty batch");
  const Architecture& arch = model.architecture;
  ModelGradient out;
  for (const ParamLayer& p : model.params) {
    out.params.push_back({Tensor(p.weights.shape()), Tensor(p.bias.shape())});
  }
  const double inv_n = 1.0 / static_cast<double>(batch.size());

  for (std::size_t s = 0; s < batch.size(); ++s) {
    const std::vector<Tensor> acts = forward_activations(model, batch.inputs[s]);
    const auto logits = acts.back().data();
    const std::size_t label = batch.labels[s];
    out.loss += cross_entropy(logits, label) * inv_n;

    // d(loss)/d(logits) = softmax - onehot.
    const double m = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double z : logits) sum += std::exp(z - m);
    Tensor grad(acts.back().shape());
    for (std::size_t k = 0; k < logits.size(); ++k) {
      grad[k] = (std::exp(logits[k] - m) / sum - (k == label ? 1.0 : 0.0)) *
                inv_n;
    }

    std::size_t param = model.params.size();
    for (std::size_t i = arch.layers.size(); i-- > 0;) {
      const LayerSpec& layer = arch.layers[i];
      const Tensor& x = acts[i];
      if (const auto* conv = std::get_if<Conv2D>(&layer)) {
        --param;
        ParamGrad g =
            conv2d_backward(*conv, x, model.params[param].weights, grad);
        for (std::size_t k = 0; k < g.weights.size(); ++k) {
          out.params[param].weights[k] += g.weights[k];
        }
        for (std::size_t k = 0; k < g.bias.size(); ++k) {
          out.params[param].bias[k] += g.bias[k];
        }
        grad = std::move(g.input);
      } else if (const auto* dense = std::get_if<Dense>(&layer)) {
        --param;
        ParamGrad g =
            dense_backward(*dense, x, model.params[param].weights, grad);
        for (std::size_t k = 0; k < g.weights.size(); ++k) {
          out.params[param].weights[k] += g.weights[k];
        }
        for (std::size_t k = 0; k < g.bias.size(); ++k) {
          out.params[param].bias[k] += g.bias[k];
        }
        grad = std::move(g.input);
      } else if (std::holds_alternative<ReLU>(layer)) {
        grad = relu_backward(x, grad);
      } else if (const auto* pool = std::get_if<MaxPool>(&layer)) {
        grad = maxpool_backward(*pool, x, grad);
      } else {
        grad = grad.reshaped(x.shape());
      }
    }
  }
  return out;
}

FloatModel init_model(const Architecture& architecture, std::uint64_t seed) {
  architecture.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  FloatModel model{architecture, {}};
  for (std::size_t idx : architecture.parametric_layers()) {
    const Shape shape = weight_shape(architecture.layers[idx]);
    const std::size_t fan_in = shape_size(shape) / shape[0];
    const double std = std::sqrt(2.0 / static_cast<double>(fan_in));
    Tensor w(shape);
    for (double& v : w.data()) v = std * unit(rng);
    model.params.push_back({std::move(w), Tensor({shape[0]})});
  }
  return model;
}

double kink_margin(const FloatModel& model, const Dataset& batch) {
  double margin = INFINITY;
  for (const Tensor& input : batch.inputs) {
    const std::vector<Tensor> acts = forward_activations(model, input);
    for (std::size_t i = 0; i < model.architecture.layers.size(); ++i) {
      const LayerSpec& spec = model.architecture.layers[i];
      const Tensor& in = acts[i];
      if (std::holds_alternative<ReLU>(spec)) {
        for (double v : in.data()) margin = std::min(margin, std::abs(v));
      } else if (const auto* pool = std::get_if<MaxPool>(&spec)) {
        const Shape& s = in.shape();
        const std::size_t w = pool->window;
        for (std::size_t c = 0; c < s[0]; ++c) {
          for (std::size_t oy = 0; oy + 1 <= s[1] / w; ++oy) {
            for (std::size_t ox = 0; ox + 1 <= s[2] / w; ++ox) {
              double top = -INFINITY, second = -INFINITY;
              for (std::size_t dy = 0; dy < w; ++dy) {
                for (std::size_t dx = 0; dx < w; ++dx) {
                  const double v =
                      in.data()[(c * s[1] + oy * w + dy) * s[2] + ox * w + dx];
                  if (v > top) {
                    second = top;
                    top = v;
                  } else if (v > second) {
                    second = v;
                  }
                }
              }
              if (second > 0.0) margin = std::min(margin, top - second);
            }
          }
        }
      }
    }
  }
  return margin;
}

GradientCheck finite_difference_check(FloatModel model, const Dataset& batch,
                                      double h) {
  const ModelGradient analytic = gradient(model, batch);
  GradientCheck result;
  for (std::size_t l = 0; l < model.params.size(); ++l) {
    for (int part = 0; part < 2; ++part) {
      auto values = part ? model.params[l].bias.data()
                         : model.params[l].weights.data();
      auto grads = part ? analytic.params[l].bias.data()
                        : analytic.params[l].weights.data();
      for (std::size_t k = 0; k < values.size(); ++k) {
        const double saved = values[k];
        values[k] = saved + h;
        const double up = mean_loss(model, batch);
        values[k] = saved - h;
        const double down = mean_loss(model, batch);
        values[k] = saved;
        const double fd = (up - down) / (2 * h);
        const double denom =
            std::max({std::abs(fd), std::abs(grads[k]), 1e-8});
        result.max_relative_error =
            std::max(result.max_relative_error, std::abs(fd - grads[k]) / denom);
        ++result.parameters;
      }
    }
  }
  return result;
}

std::pair<FloatModel, Dataset> smooth_gradient_fixture(
    const Architecture& architecture, std::size_t batch_size,
    std::uint64_t seed, double margin) {
  for (std::uint64_t attempt = 0; attempt < 1000; ++attempt) {
    std::mt19937_64 rng(seed + attempt);
    std::normal_distribution<double> unit(0.0, 1.0);
    FloatModel model = init_model(architecture, rng());
    for (ParamLayer& p : model.params) {
      for (double& v : p.bias.data()) v = 0.1 * unit(rng);
    }
    Dataset batch;
    const std::size_t dim = shape_size(architecture.input_shape);
    for (std::size_t i = 0; i < batch_size; ++i) {
      std::vector<double> x(dim);
      for (double& v : x) v = unit(rng);
      batch.inputs.emplace_back(architecture.input_shape, std::move(x));
      batch.labels.push_back(i % architecture.num_classes);
    }
    if (kink_margin(model, batch) > margin) return {model, batch};
  }
  throw Error("no kink-free gradient fixture found");
}

FloatModel train(const Architecture& architecture, const Dataset& data,
                 const TrainConfig& config,
                 std::vector<double>* epoch_losses) {
  if (config.epochs == 0 || config.batch_size == 0 ||
      !(config.learning_rate > 0.0) || !(config.l1 >= 0.0)) {
    throw Error("training configuration values must be positive");
  }
  if (data.empty()) throw Error("cannot train on an empty dataset");
  data.validate(architecture.input_shape, architecture.num_classes);

  FloatModel model = init_model(architecture, config.seed);
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t b = 0; b < order.size(); b += config.batch_size) {
      Dataset batch;
      for (std::size_t i = b; i < std::min(order.size(), b + config.batch_size);
           ++i) {
        batch.inputs.push_back(data.inputs[order[i]]);
        batch.labels.push_back(data.labels[order[i]]);
      }
      const ModelGradient g = gradient(model, batch);
      if (!std::isfinite(g.loss)) {
        throw Error("training diverged at epoch " + std::to_string(epoch));
      }
      epoch_loss += g.loss;
      ++batches;
      for (std::size_t l = 0; l < model.params.size(); ++l) {
        auto w = model.params[l].weights.data();
        auto gw = g.params[l].weights.data();
        for (std::size_t k = 0; k < w.size(); ++k) {
          const double sign = (w[k] > 0.0) - (w[k] < 0.0);
          w[k] -= config.learning_rate * (gw[k] + config.l1 * sign);
        }
        auto bias = model.params[l].bias.data();
        auto gb = g.params[l].bias.data();
        for (std::size_t k = 0; k < bias.size(); ++k) {
          bias[k] -= config.learning_rate * gb[k];
        }
      }
    }
    if (epoch_losses) {
      epoch_losses->push_back(epoch_loss / static_cast<double>(batches));
    }
  }

  for (ParamLayer& p : model.params) {
    for (double& v : p.weights.data()) v = static_cast<float>(v);
    for (double& v : p.bias.data()) v = static_cast<float>(v);
  }
  return model;
}

Architecture desk_architecture(std::size_t num_classes) {
  return Architecture{{1, 8, 8},
                      num_classes,
                      {Conv2D{1, 8, 3}, ReLU{}, MaxPool{2}, Conv2D{8, 16, 3},
                       ReLU{}, Flatten{}, Dense{16, num_classes}}};
}

SynthSpec desk_synth_spec() { return SynthSpec{}; }

TrainConfig desk_train_config() {
  TrainConfig cfg;
  cfg.l1 = 0.003;
  return cfg;
}

}  // namespace bitsiege
