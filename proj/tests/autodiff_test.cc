/*
 * Copyright 2026 The cfaug Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Reverse-mode gradients against central finite differences (double
// precision), plus forward-value hand cases for the ops and the network.

#include "cfaug/autodiff.h"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "cfaug/network.h"
#include "cfaug/random.h"
#include "gradcheck.h"

namespace cfaug::nn {
namespace {

using testing::CheckGraph;
using testing::GraphBuilder;
using testing::RandomTensor;

constexpr double kTol = 1e-3;

// Reduces an arbitrary tensor to a scalar with fixed random weights, so every
// output coordinate contributes a distinct amount.
Var Reduce(Graph<double>& g, Var v, std::uint64_t seed = 99) {
  Rng rng(seed);
  return Sum(g, MulConstant(g, v, RandomTensor(g.value(v).shape(), rng)));
}

void ExpectGradientsMatch(const GraphBuilder& build,
                          std::vector<Tensor<double>> inputs) {
  const auto r = CheckGraph(build, std::move(inputs));
  EXPECT_GT(r.checked, 0);
  EXPECT_LE(r.skipped, r.checked / 10);
  EXPECT_LT(r.max_rel_error, kTol);
}

TEST(AutodiffGradTest, Conv2dWithBias) {
  Rng rng(1);
  ExpectGradientsMatch(
      [](Graph<double>& g, const std::vector<Var>& v) {
        return Reduce(g, Conv2d(g, v[0], v[1], v[2]));
      },
      {RandomTensor({2, 3, 5, 4}, rng), RandomTensor({4, 3, 3, 3}, rng),
       RandomTensor({4}, rng)});
}

TEST(AutodiffGradTest, Conv2dWithoutBias) {
  Rng rng(2);
  ExpectGradientsMatch(
      [](Graph<double>& g, const std::vector<Var>& v) {
        return Reduce(g, Conv2d(g, v[0], v[1], Var{}));
      },
      {RandomTensor({1, 2, 4, 4}, rng), RandomTensor({3, 2, 3, 3}, rng)});
}

TEST(AutodiffGradTest, ReluAndPools) {
  Rng rng(3);
  ExpectGradientsMatch(
      [](Graph<double>& g, const std::vector<Var>& v) {
        return Add(g, Reduce(g, Flatten(g, AvgPool2(g, Relu(g, v[0])))),
                   Reduce(g, GlobalAvgPool(g, v[0]), 5));
      },
      {RandomTensor({2, 3, 4, 6}, rng)});
}

TEST(AutodiffGradTest, LinearScaleAddConstant) {
  Rng rng(4);
  ExpectGradientsMatch(
      [](Graph<double>& g, const std::vector<Var>& v) {
        Var y = Linear(g, v[0], v[1], v[2]);
        return Reduce(g, AddConstant(g, Scale(g, y, -1.5), 0.25));
      },
      {RandomTensor({3, 5}, rng), RandomTensor({4, 5}, rng),
       RandomTensor({4}, rng)});
}

TEST(AutodiffGradTest, ClassificationLosses) {
  Rng rng(5);
  const std::vector<int> labels = {0, 3, 1};
  Tensor<double> targets({3, 4});
  std::uniform_real_distribution<double> u(0.1, 1.0);
  for (int n = 0; n < 3; ++n) {
    double sum = 0;
    for (int k = 0; k < 4; ++k) sum += targets[n * 4 + k] = u(rng);
    for (int k = 0; k < 4; ++k) targets[n * 4 + k] /= sum;
  }
  ExpectGradientsMatch(
      [&](Graph<double>& g, const std::vector<Var>& v) {
        Var a = CrossEntropy(g, v[0], labels);
        Var b = SoftCrossEntropy(g, v[0], targets);
        Var c = NotLabelNll(g, v[0], labels);
        Var d = Sum(g, SelectColumns(g, v[0], labels));
        return Add(g, Add(g, a, Scale(g, b, 0.5)), Add(g, c, d));
      },
      {RandomTensor({3, 4}, rng, 2.0)});
}

TEST(AutodiffGradTest, ReluMaskLikeTreatsMaskAsConstant) {
  Rng rng(6);
  const Tensor<double> pre = RandomTensor({2, 6}, rng);
  ExpectGradientsMatch(
      [&](Graph<double>& g, const std::vector<Var>& v) {
        return Reduce(g, ReluMaskLike(g, v[0], g.Constant(pre)));
      },
      {RandomTensor({2, 6}, rng)});
}

TEST(AutodiffValueTest, Conv2dHandCase) {
  // 3x3 input of ones, 3x3 kernel of ones: corners see 4, edges 6, centre 9.
  Graph<double> g;
  Var x = g.Constant(Tensor<double>({1, 1, 3, 3}, 1.0));
  Var w = g.Constant(Tensor<double>({1, 1, 3, 3}, 1.0));
  Var b = g.Constant(Tensor<double>({1}, 0.5));
  const auto& y = g.value(Conv2d(g, x, w, b));
  EXPECT_EQ(std::vector<double>(y.values().begin(), y.values().end()),
            (std::vector<double>{4.5, 6.5, 4.5, 6.5, 9.5, 6.5, 4.5, 6.5, 4.5}));
}

TEST(AutodiffValueTest, PoolsHandCase) {
  Graph<double> g;
  Var x = g.Constant(Tensor<double>(
      {1, 1, 2, 4}, std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8}));
  const auto& avg = g.value(AvgPool2(g, x));
  EXPECT_EQ(avg.shape(), (std::vector<int>{1, 1, 1, 2}));
  EXPECT_DOUBLE_EQ(avg[0], 3.5);
  EXPECT_DOUBLE_EQ(avg[1], 5.5);
  EXPECT_DOUBLE_EQ(g.value(GlobalAvgPool(g, x))[0], 4.5);
  EXPECT_THROW(AvgPool2(g, g.Constant(Tensor<double>({1, 1, 3, 2}))),
               InvalidArgument);
}

TEST(AutodiffValueTest, LossesAtKnownPoints) {
  Graph<double> g;
  const std::vector<int> labels = {2};
  Var uniform = g.Constant(Tensor<double>({1, 5}, 0.3));
  EXPECT_NEAR(g.value(CrossEntropy(g, uniform, labels))[0], std::log(5.0),
              1e-12);
  EXPECT_NEAR(g.value(NotLabelNll(g, uniform, labels))[0], -std::log(1.0 - 0.2),
              1e-12);
  // Extreme logits stay finite.
  Var extreme = g.Constant(
      Tensor<double>({1, 3}, std::vector<double>{1000.0, -1000.0, 0.0}));
  const std::vector<int> y0 = {0};
  EXPECT_TRUE(std::isfinite(g.value(CrossEntropy(g, extreme, y0))[0]));
  EXPECT_NEAR(g.value(NotLabelNll(g, extreme, y0))[0], 1000.0, 1e-9);
  EXPECT_THROW(CrossEntropy(g, uniform, std::vector<int>{5}), InvalidArgument);
}

TEST(AutodiffValueTest, SoftmaxRowsSumToOne) {
  Rng rng(7);
  const Tensor<double> probs = Softmax(RandomTensor({4, 6}, rng, 10.0));
  for (int n = 0; n < 4; ++n) {
    double sum = 0;
    for (int k = 0; k < 6; ++k) sum += probs[n * 6 + k];
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(GraphTest, BackwardRulesEnforced) {
  Graph<double> g;
  Var x = g.Leaf(Tensor<double>({2}, 1.0));
  EXPECT_THROW(g.Backward(x), GraphError);  // not a scalar
  Var s = Sum(g, x);
  g.Backward(s);
  EXPECT_EQ(g.grad(x)[0], 1.0);
  EXPECT_TRUE(g.consumed());
  EXPECT_THROW(g.Backward(s), GraphError);
  Graph<double> other;
  EXPECT_THROW(other.value(Var{5}), GraphError);
}

TEST(GraphTest, ConstantsReceiveNoGradient) {
  Graph<double> g;
  Var c = g.Constant(Tensor<double>({1}, 2.0));
  Var x = g.Leaf(Tensor<double>({1}, 3.0));
  Var y = Add(g, Scale(g, c, 4.0), x);
  EXPECT_FALSE(g.requires_grad(Scale(g, c, 1.0)));
  g.Backward(y);
  EXPECT_EQ(g.grad(c)[0], 0.0);
  EXPECT_EQ(g.grad(x)[0], 1.0);
}

NetworkSpec SmallSpec(bool global_pool) {
  NetworkSpec spec;
  spec.height = 8;
  spec.width = 8;
  spec.num_classes = 3;
  spec.conv1 = 4;
  spec.conv2 = 5;
  spec.global_pool = global_pool;
  return spec;
}

Tensor<double> RandomInput(Rng& rng, int n, const NetworkSpec& spec) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Tensor<double> x({n, spec.in_channels, spec.height, spec.width});
  for (auto& v : x.values()) v = u(rng);
  return x;
}

class NetworkGradTest : public ::testing::TestWithParam<bool> {};

TEST_P(NetworkGradTest, ParameterAndInputGradients) {
  const NetworkSpec spec = SmallSpec(GetParam());
  Network<double> net(spec, 11);
  Rng rng(12);
  const Tensor<double> x = RandomInput(rng, 2, spec);
  const std::vector<int> labels = {1, 2};
  std::vector<Tensor<double>> inputs = net.params();
  inputs.push_back(x);
  ExpectGradientsMatch(
      [&](Graph<double>& g, const std::vector<Var>& v) {
        Network<double>::Bound b;
        b.params.assign(v.begin(), v.end() - 1);
        return CrossEntropy(g, net.Forward(g, b, v.back()), labels);
      },
      inputs);
}

TEST_P(NetworkGradTest, TangentLogitsAreDirectionalDerivatives) {
  const NetworkSpec spec = SmallSpec(GetParam());
  const Network<double> net(spec, 21);
  Rng rng(22);
  const Tensor<double> x = RandomInput(rng, 2, spec);
  const Tensor<double> dir = RandomTensor(x.shape(), rng);
  Graph<double> g;
  const auto b = net.Bind(g, false);
  const auto [logits, tangent] =
      net.ForwardWithTangent(g, b, g.Constant(x), g.Constant(dir));
  const double h = 1e-6;
  Tensor<double> up = x, down = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    up[i] += h * dir[i];
    down[i] -= h * dir[i];
  }
  const Tensor<double> lu = net.Logits(up), ld = net.Logits(down);
  for (std::size_t i = 0; i < lu.size(); ++i) {
    EXPECT_NEAR(g.value(logits)[i], net.Logits(x)[i], 1e-12);
    EXPECT_LT(
        testing::RelativeError(g.value(tangent)[i], (lu[i] - ld[i]) / (2 * h)),
        kTol);
  }
}

TEST_P(NetworkGradTest, InputGradientMatchesTangent) {
  // <dlogit_c/dx, d> equals the tangent logit c along d.
  const NetworkSpec spec = SmallSpec(GetParam());
  const Network<double> net(spec, 31);
  Rng rng(32);
  const Tensor<double> x = RandomInput(rng, 1, spec);
  const Tensor<double> dir = RandomTensor(x.shape(), rng);
  const std::vector<int> cls = {2};
  const Tensor<double> grad = InputGradients(net, x, cls);
  double dot = 0;
  for (std::size_t i = 0; i < x.size(); ++i) dot += grad[i] * dir[i];
  Graph<double> g;
  const auto b = net.Bind(g, false);
  const auto tangent =
      net.ForwardWithTangent(g, b, g.Constant(x), g.Constant(dir)).second;
  EXPECT_NEAR(dot, g.value(tangent)[2], 1e-10);
}

INSTANTIATE_TEST_SUITE_P(Pooling, NetworkGradTest, ::testing::Bool());

TEST(NetworkTest, SpecValidation) {
  NetworkSpec spec;
  spec.height = 10;
  EXPECT_THROW(Network<float>(spec, 0), InvalidArgument);
  spec = NetworkSpec{};
  spec.num_classes = 1;
  EXPECT_THROW(Network<float>(spec, 0), InvalidArgument);
}

TEST(NetworkTest, DeterministicInitAndParamShapes) {
  const NetworkSpec spec = SmallSpec(false);
  EXPECT_EQ(Network<float>(spec, 3), Network<float>(spec, 3));
  EXPECT_NE(Network<float>(spec, 3), Network<float>(spec, 4));
  const Network<float> net(spec, 3);
  EXPECT_EQ(net.params().size(), Network<float>::ParamNames().size());
  EXPECT_EQ(net.params()[4].shape(), (std::vector<int>{3, 5 * 2 * 2}));
  EXPECT_EQ(Network<float>(SmallSpec(true), 3).params()[4].shape(),
            (std::vector<int>{3, 5}));
  EXPECT_EQ(net.ParameterCount(), 4u * 27 + 4 + 5 * 36 + 5 + 60 + 3);
}

TEST(NetworkTest, RejectsBadInput) {
  const NetworkSpec spec = SmallSpec(false);
  const Network<float> net(spec, 1);
  Tensor<float> x({1, 3, 8, 8}, 0.0f);
  EXPECT_NO_THROW(net.Logits(x));
  x[5] = std::nanf("");
  EXPECT_THROW(net.Logits(x), InvalidArgument);
  EXPECT_THROW(net.Logits(Tensor<float>({1, 3, 4, 8})), InvalidArgument);
}

TEST(NetworkTest, FloatAgreesWithDouble) {
  const NetworkSpec spec = SmallSpec(false);
  const Network<double> net(spec, 5);
  Rng rng(6);
  const Tensor<double> x = RandomInput(rng, 3, spec);
  const Tensor<double> ld = net.Logits(x);
  const Tensor<float> lf = net.Cast<float>().Logits(x.Cast<float>());
  for (std::size_t i = 0; i < ld.size(); ++i) EXPECT_NEAR(lf[i], ld[i], 1e-4);
}

TEST(BatchTest, MakeBatchRoundTrip) {
  Rng rng(1);
  std::vector<Image> images = {testing::RandomImage(Shape{4, 4, 3}, rng),
                               testing::RandomImage(Shape{4, 4, 3}, rng)};
  const Tensor<double> batch =
      MakeBatch<double>(std::span<const Image>(images));
  EXPECT_EQ(batch.shape(), (std::vector<int>{2, 3, 4, 4}));
  // Channel-planar layout in normalized space; pixels are normalized in
  // float before widening.
  EXPECT_DOUBLE_EQ(batch[1 * 48 + 2 * 16 + 3 * 4 + 1],
                   static_cast<double>(2.0f * images[1].at(3, 1, 2) - 1.0f));
  for (int i = 0; i < 2; ++i) {
    const Image back = ImageFromBatch(batch, i);
    for (std::size_t j = 0; j < back.data().size(); ++j) {
      EXPECT_NEAR(back.data()[j], images[i].data()[j], 1e-7);
    }
  }
}

TEST(SaliencyTest, ChannelNorm) {
  Tensor<double> grad({1, 2, 1, 2}, std::vector<double>{3, 0, 4, -2});
  const Saliency s = SaliencyFromGradient(grad, 0);
  EXPECT_DOUBLE_EQ(s.scores[0], 5.0);
  EXPECT_DOUBLE_EQ(s.scores[1], 2.0);
}

TEST(SgdTest, MomentumAndDecayUpdate) {
  const NetworkSpec spec = SmallSpec(false);
  Network<double> net(spec, 1);
  const Network<double> start = net;
  std::vector<Tensor<double>> grads;
  for (const auto& p : net.params()) grads.emplace_back(p.shape(), 0.5);
  SgdOptimizer<double> opt;
  const SgdOptions o{0.1, 0.9, 0.01};
  ASSERT_TRUE(opt.Step(net, grads, o));
  const double p0 = start.params()[0][0];
  const double v1 = 0.5 + 0.01 * p0;
  const double p1 = p0 - 0.1 * v1;
  EXPECT_DOUBLE_EQ(net.params()[0][0], p1);
  ASSERT_TRUE(opt.Step(net, grads, o));
  const double v2 = 0.9 * v1 + 0.5 + 0.01 * p1;
  EXPECT_DOUBLE_EQ(net.params()[0][0], p1 - 0.1 * v2);
}

TEST(SgdTest, NonFiniteGradientIsRejected) {
  Network<double> net(SmallSpec(false), 1);
  const Network<double> start = net;
  std::vector<Tensor<double>> grads;
  for (const auto& p : net.params()) grads.emplace_back(p.shape(), 0.0);
  grads[2][3] = std::numeric_limits<double>::infinity();
  SgdOptimizer<double> opt;
  EXPECT_FALSE(opt.Step(net, grads, {}));
  EXPECT_EQ(net, start);
  EXPECT_EQ(opt.rejected_steps(), 1);
}

}  // namespace
}  // namespace cfaug::nn
