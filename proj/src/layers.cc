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

#include "bitsiege/layers.h"

#include <algorithm>
#include <limits>

#include "bitsiege/error.h"

namespace bitsiege {

Tensor conv2d_forward(const Conv2D& spec, const Tensor& input,
                      const Tensor& weights, const Tensor& bias) {
  const Shape out_shape = output_shape(spec, input.shape());
  const std::size_t in_h = input.shape()[1], in_w = input.shape()[2];
  const std::size_t out_h = out_shape[1], out_w = out_shape[2];
  const std::size_t k = spec.kernel;
  Tensor out(out_shape);
  for (std::size_t co = 0; co < spec.c_out; ++co) {
    for (std::size_t oy = 0; oy < out_h; ++oy) {
      for (std::size_t ox = 0; ox < out_w; ++ox) {
        double acc = bias[co];
        for (std::size_t ci = 0; ci < spec.c_in; ++ci) {
          for (std::size_t ky = 0; ky < k; ++ky) {
            // Signed arithmetic for the zero-padding border.
            const auto iy = static_cast<std::ptrdiff_t>(oy * spec.stride + ky) -
                            static_cast<std::ptrdiff_t>(spec.padding);
            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(in_h)) continue;
            for (std::size_t kx = 0; kx < k; ++kx) {
              const auto ix =
                  static_cast<std::ptrdiff_t>(ox * spec.stride + kx) -
                  static_cast<std::ptrdiff_t>(spec.padding);
              if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(in_w)) continue;
              acc += weights[((co * spec.c_in + ci) * k + ky) * k + kx] *
                     input[(ci * in_h + iy) * in_w + ix];
            }
          }
        }
        out[(co * out_h + oy) * out_w + ox] = acc;
      }
    }
  }
  return out;
}

ParamGrad conv2d_backward(const Conv2D& spec, const Tensor& input,
                          const Tensor& weights, const Tensor& grad_output) {
  const std::size_t in_h = input.shape()[1], in_w = input.shape()[2];
  const std::size_t out_h = grad_output.shape()[1];
  const std::size_t out_w = grad_output.shape()[2];
  const std::size_t k = spec.kernel;
  ParamGrad g{Tensor(input.shape()), Tensor(weights.shape()),
              Tensor({spec.c_out})};
  for (std::size_t co = 0; co < spec.c_out; ++co) {
    for (std::size_t oy = 0; oy < out_h; ++oy) {
      for (std::size_t ox = 0; ox < out_w; ++ox) {
        const double go = grad_output[(co * out_h + oy) * out_w + ox];
        g.bias[co] += go;
        for (std::size_t ci = 0; ci < spec.c_in; ++ci) {
          for (std::size_t ky = 0; ky < k; ++ky) {
            const auto iy = static_cast<std::ptrdiff_t>(oy * spec.stride + ky) -
                            static_cast<std::ptrdiff_t>(spec.padding);
            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(in_h)) continue;
            for (std::size_t kx = 0; kx < k; ++kx) {
              const auto ix =
                  static_cast<std::ptrdiff_t>(ox * spec.stride + kx) -
                  static_cast<std::ptrdiff_t>(spec.padding);
              if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(in_w)) continue;
              const std::size_t wi = ((co * spec.c_in + ci) * k + ky) * k + kx;
              const std::size_t xi = (ci * in_h + iy) * in_w + ix;
              g.weights[wi] += go * input[xi];
              g.input[xi] += go * weights[wi];
            }
          }
        }
      }
    }
  }
  return g;
}

Tensor dense_forward(const Dense& spec, const Tensor& input,
                     const Tensor& weights, const Tensor& bias) {
  Tensor out({spec.out_features});
  for (std::size_t o = 0; o < spec.out_features; ++o) {
    double acc = bias[o];
    for (std::size_t i = 0; i < spec.in_features; ++i) {
      acc += weights[o * spec.in_features + i] * input[i];
    }
    out[o] = acc;
  }
  return out;
}

ParamGrad dense_backward(const Dense& spec, const Tensor& input,
                         const Tensor& weights, const Tensor& grad_output) {
  ParamGrad g{Tensor(input.shape()), Tensor(weights.shape()),
              Tensor({spec.out_features})};
  for (std::size_t o = 0; o < spec.out_features; ++o) {
    const double go = grad_output[o];
    g.bias[o] = go;
    for (std::size_t i = 0; i < spec.in_features; ++i) {
      g.weights[o * spec.in_features + i] = go * input[i];
      g.input[i] += go * weights[o * spec.in_features + i];
    }
  }
  return g;
}

Tensor relu_forward(const Tensor& input) {
  Tensor out = input;
  for (double& v : out.data()) v = std::max(v, 0.0);
  return out;
}

Tensor relu_backward(const Tensor& input, const Tensor& grad_output) {
  Tensor g = grad_output;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (input[i] <= 0.0) g[i] = 0.0;
  }
  return g;
}

namespace {

// Flat input index of the maximum in pooling window (c, oy, ox); ties go to
// the first element in row-major order.
std::size_t pool_argmax(const MaxPool& spec, const Tensor& input,
                        std::size_t c, std::size_t oy, std::size_t ox) {
  const std::size_t h = input.shape()[1], w = input.shape()[2];
  std::size_t best = (c * h + oy * spec.window) * w + ox * spec.window;
  for (std::size_t ky = 0; ky < spec.window; ++ky) {
    for (std::size_t kx = 0; kx < spec.window; ++kx) {
      const std::size_t i =
          (c * h + oy * spec.window + ky) * w + ox * spec.window + kx;
      if (input[i] > input[best]) best = i;
    }
  }
  return best;
}

}  // namespace

Tensor maxpool_forward(const MaxPool& spec, const Tensor& input) {
  const Shape out_shape = output_shape(spec, input.shape());
  Tensor out(out_shape);
  for (std::size_t c = 0; c < out_shape[0]; ++c) {
    for (std::size_t oy = 0; oy < out_shape[1]; ++oy) {
      for (std::size_t ox = 0; ox < out_shape[2]; ++ox) {
        out[(c * out_shape[1] + oy) * out_shape[2] + ox] =
            input[pool_argmax(spec, input, c, oy, ox)];
      }
    }
  }
  return out;
}

Tensor maxpool_backward(const MaxPool& spec, const Tensor& input,
                        const Tensor& grad_output) {
  const Shape& out_shape = grad_output.shape();
  Tensor g(input.shape());
  for (std::size_t c = 0; c < out_shape[0]; ++c) {
    for (std::size_t oy = 0; oy < out_shape[1]; ++oy) {
      for (std::size_t ox = 0; ox < out_shape[2]; ++ox) {
        g[pool_argmax(spec, input, c, oy, ox)] +=
            grad_output[(c * out_shape[1] + oy) * out_shape[2] + ox];
      }
    }
  }
  return g;
}

std::vector<Tensor> forward_activations(const FloatModel& model,
                                        const Tensor& input) {
  const Architecture& arch = model.architecture;
  if (input.shape() != arch.input_shape) {
    throw ShapeError("input shape " + shape_string(input.shape()) +
                     " does not match model input " +
                     shape_string(arch.input_shape));
  }
  std::vector<Tensor> acts{input};
  acts.reserve(arch.layers.size() + 1);
  std::size_t param = 0;
  for (const LayerSpec& layer : arch.layers) {
    const Tensor& x = acts.back();
    if (const auto* conv = std::get_if<Conv2D>(&layer)) {
      const ParamLayer& p = model.params[param++];
      acts.push_back(conv2d_forward(*conv, x, p.weights, p.bias));
    } else if (const auto* dense = std::get_if<Dense>(&layer)) {
      const ParamLayer& p = model.params[param++];
      acts.push_back(dense_forward(*dense, x, p.weights, p.bias));
    } else if (std::holds_alternative<ReLU>(layer)) {
      acts.push_back(relu_forward(x));
    } else if (const auto* pool = std::get_if<MaxPool>(&layer)) {
      acts.push_back(maxpool_forward(*pool, x));
    } else {
      acts.push_back(x.reshaped({x.size()}));
    }
  }
  return acts;
}

}  // namespace bitsiege
