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

#include <gtest/gtest.h>

#include <random>

#include "bitsiege/error.h"
#include "bitsiege/layers.h"
#include "bitsiege/model.h"
#include "test_util.h"

namespace bitsiege {
namespace {

using testing::random_model;
using testing::random_tensor;

FloatModel constant_logit_model(std::size_t classes) {
  // Zero weights and bias [1, 0, ...]: logits never depend on the input.
  Architecture arch{{2}, classes, {Dense{2, classes}}};
  Tensor bias({classes});
  bias[0] = 1.0;
  return FloatModel{arch, {{Tensor({classes, 2}), bias}}};
}

Dataset labelled(std::vector<std::size_t> labels) {
  Dataset d;
  for (std::size_t l : labels) {
    d.inputs.push_back(Tensor::vector({0.5, -0.5}));
    d.labels.push_back(l);
  }
  return d;
}

TEST(Tensor, RejectsShapeMismatchAndNonFinite) {
  EXPECT_THROW(Tensor({2, 2}, {1.0, 2.0, 3.0}), ShapeError);
  EXPECT_THROW(Tensor({1}, {std::nan("")}), Error);
  EXPECT_THROW(Tensor({0, 3}), ShapeError);
  EXPECT_EQ(Tensor({2, 3}).size(), 6u);
}

TEST(Forward, DenseIdentityReturnsInput) {
  Tensor w({3, 3});
  for (std::size_t i = 0; i < 3; ++i) w[i * 3 + i] = 1.0;
  FloatModel m{Architecture{{3}, 3, {Dense{3, 3}}}, {{w, Tensor({3})}}};
  EXPECT_EQ(forward(m, Tensor::vector({0.25, -7.0, 3.5})),
            (std::vector<double>{0.25, -7.0, 3.5}));
}

TEST(Forward, ReluClampsNegatives) {
  const Tensor out = relu_forward(Tensor::vector({-1.0, 2.0, 0.0}));
  EXPECT_EQ(out, Tensor::vector({0.0, 2.0, 0.0}));
}

TEST(Forward, PointwiseConvScalesConstantImage) {
  const Tensor input({1, 4, 4}, std::vector<double>(16, 3.0));
  const Tensor out = conv2d_forward(Conv2D{1, 1, 1}, input,
                                    Tensor({1, 1, 1, 1}, {2.0}), Tensor({1}));
  ASSERT_EQ(out.shape(), (Shape{1, 4, 4}));
  for (double v : out.data()) EXPECT_EQ(v, 6.0);
}

TEST(Forward, RejectsInputShapeMismatch) {
  const FloatModel m = random_model(testing::small_architecture(), 1);
  EXPECT_THROW(forward(m, Tensor({2, 4, 4})), ShapeError);
  EXPECT_THROW(forward(m, Tensor({18})), ShapeError);
}

TEST(Forward, MaxPoolPicksWindowMaxima) {
  Tensor in({1, 4, 4}, {1, 2, 0, 0,
                        3, 4, 0, 9,
                        -1, -2, 5, 5,
                        -3, -4, 5, 5});
  EXPECT_EQ(maxpool_forward(MaxPool{2}, in), Tensor({1, 2, 2}, {4, 9, -1, 5}));
}

// Direct convolution written independently of the library kernel.
Tensor reference_conv(const Conv2D& c, const Tensor& x, const Tensor& w,
                      const Tensor& b) {
  const long H = static_cast<long>(x.shape()[1]), W = static_cast<long>(x.shape()[2]);
  const long K = static_cast<long>(c.kernel), S = static_cast<long>(c.stride),
             P = static_cast<long>(c.padding);
  const long OH = (H + 2 * P - K) / S + 1, OW = (W + 2 * P - K) / S + 1;
  Tensor out({c.c_out, static_cast<std::size_t>(OH), static_cast<std::size_t>(OW)});
  for (long co = 0; co < static_cast<long>(c.c_out); ++co)
    for (long oy = 0; oy < OH; ++oy)
      for (long ox = 0; ox < OW; ++ox) {
        double s = b[co];
        for (long ci = 0; ci < static_cast<long>(c.c_in); ++ci)
          for (long ky = 0; ky < K; ++ky)
            for (long kx = 0; kx < K; ++kx) {
              const long y = oy * S + ky - P, xx = ox * S + kx - P;
              if (y < 0 || y >= H || xx < 0 || xx >= W) continue;
              s += w[((co * static_cast<long>(c.c_in) + ci) * K + ky) * K + kx] *
                   x[(ci * H + y) * W + xx];
            }
        out[(co * OH + oy) * OW + ox] = s;
      }
  return out;
}

TEST(Forward, ConvMatchesNestedLoopReference) {
  std::mt19937_64 rng(17);
  for (const Conv2D c : {Conv2D{1, 1, 3}, Conv2D{2, 3, 3, 1, 1},
                         Conv2D{3, 2, 2, 2, 0}, Conv2D{2, 4, 5, 1, 2},
                         Conv2D{1, 2, 3, 2, 1}}) {
    for (int trial = 0; trial < 5; ++trial) {
      const Tensor x = random_tensor({c.c_in, 5, 5}, rng);
      const Tensor w = random_tensor(weight_shape(c), rng);
      const Tensor b = random_tensor({c.c_out}, rng);
      const Tensor got = conv2d_forward(c, x, w, b);
      const Tensor want = reference_conv(c, x, w, b);
      ASSERT_EQ(got.shape(), want.shape());
      for (std::size_t i = 0; i < got.size(); ++i) {
        EXPECT_NEAR(got[i], want[i], 1e-12);
      }
    }
  }
}

TEST(Forward, DeterministicAndPure) {
  const FloatModel m = random_model(testing::small_architecture(), 3);
  const FloatModel copy = m;
  std::mt19937_64 rng(4);
  const Tensor x = random_tensor({2, 3, 3}, rng);
  EXPECT_EQ(forward(m, x), forward(m, x));
  EXPECT_EQ(m, copy);
}

TEST(Accuracy, ConstantModelExamples) {
  const FloatModel m = constant_logit_model(3);
  EXPECT_EQ(accuracy(m, labelled({0, 0, 0})), 1.0);
  EXPECT_EQ(accuracy(m, labelled({1, 1, 1})), 0.0);
  EXPECT_EQ(accuracy(m, labelled({0, 1, 0, 1})), 0.5);
}

TEST(Accuracy, EmptyDatasetIsAnError) {
  EXPECT_THROW(accuracy(constant_logit_model(2), Dataset{}), Error);
}

TEST(Accuracy, ArgmaxTiesGoToLowestIndex) {
  EXPECT_EQ(argmax(std::vector<double>{1.0, 3.0, 3.0, 2.0}), 1u);
  EXPECT_EQ(argmax(std::vector<double>{0.0, 0.0}), 0u);
  // All-zero logits classify everything as class 0.
  FloatModel m = constant_logit_model(2);
  m.params[0].bias[0] = 0.0;
  EXPECT_EQ(accuracy(m, labelled({0, 0, 1})), 2.0 / 3.0);
}

TEST(Accuracy, OwnArgmaxLabelsScorePerfectly) {
  const FloatModel m = random_model(testing::small_architecture(), 8);
  Dataset d = testing::random_dataset({2, 3, 3}, 3, 40, 9);
  for (std::size_t i = 0; i < d.size(); ++i) {
    d.labels[i] = argmax(forward(m, d.inputs[i]));
  }
  EXPECT_EQ(accuracy(m, d), 1.0);
}

TEST(Architecture, ValidatesComposition) {
  EXPECT_NO_THROW(testing::small_architecture().validate());
  // Dense without Flatten after a conv.
  EXPECT_THROW((Architecture{{1, 4, 4}, 2, {Conv2D{1, 2, 3}, Dense{8, 2}}}.validate()),
               ShapeError);
  // Output width differs from class count.
  EXPECT_THROW((Architecture{{4}, 3, {Dense{4, 2}}}.validate()), ShapeError);
  // No parametric layer.
  EXPECT_THROW((Architecture{{3}, 3, {ReLU{}}}.validate()), ShapeError);
  // Channel mismatch.
  EXPECT_THROW((Architecture{{2, 4, 4}, 2, {Conv2D{1, 2, 3}, Flatten{}, Dense{8, 2}}}.validate()),
               ShapeError);
}

TEST(Architecture, ActivationShapes) {
  const auto shapes = Architecture{{1, 8, 8}, 4,
                                   {Conv2D{1, 8, 3}, ReLU{}, MaxPool{2},
                                    Conv2D{8, 16, 3}, ReLU{}, Flatten{},
                                    Dense{16, 4}}}
                          .activation_shapes();
  EXPECT_EQ(shapes[1], (Shape{8, 6, 6}));
  EXPECT_EQ(shapes[3], (Shape{8, 3, 3}));
  EXPECT_EQ(shapes[4], (Shape{16, 1, 1}));
  EXPECT_EQ(shapes.back(), (Shape{4}));
}

TEST(FloatModel, ValidateCatchesWeightShape) {
  FloatModel m = random_model(testing::small_architecture(), 1);
  EXPECT_NO_THROW(m.validate());
  m.params[1].weights = Tensor({3, 11});
  EXPECT_THROW(m.validate(), ShapeError);
}

}  // namespace
}  // namespace bitsiege
