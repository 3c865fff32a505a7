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

#include "cfaug/network.h"

#include <cmath>
#include <random>

namespace cfaug::nn {
namespace {

enum ParamIndex { kConv1W, kConv1B, kConv2W, kConv2B, kFcW, kFcB, kNumParams };

std::vector<std::vector<int>> ParamShapes(const NetworkSpec& s) {
  const int features =
      s.global_pool ? s.conv2 : s.conv2 * (s.height / 4) * (s.width / 4);
  return {{s.conv1, s.in_channels, 3, 3}, {s.conv1},
          {s.conv2, s.conv1, 3, 3},       {s.conv2},
          {s.num_classes, features},      {s.num_classes}};
}

}  // namespace

void NetworkSpec::Validate() const {
  if (in_channels != 1 && in_channels != 3) {
    throw InvalidArgument("network input must have 1 or 3 channels");
  }
  if (height <= 0 || width <= 0 || height % 4 || width % 4) {
    throw InvalidArgument(
        "network input size must be a positive multiple of 4");
  }
  if (num_classes < 2) throw InvalidArgument("network needs >= 2 classes");
  if (conv1 <= 0 || conv2 <= 0) throw InvalidArgument("empty conv layer");
}

template <typename T>
Network<T>::Network(const NetworkSpec& spec, std::uint64_t seed) : spec_(spec) {
  spec.Validate();
  std::mt19937_64 rng(seed);
  const auto shapes = ParamShapes(spec);
  for (int i = 0; i < kNumParams; ++i) {
    Tensor<T> p(shapes[i]);
    if (shapes[i].size() > 1) {
      const std::size_t fan_in = p.size() / shapes[i][0];
      std::normal_distribution<double> init(0.0, std::sqrt(2.0 / fan_in));
      for (auto& v : p.values()) v = static_cast<T>(init(rng));
    }
    params_.push_back(std::move(p));
  }
}

template <typename T>
Network<T>::Network(const NetworkSpec& spec, std::vector<Tensor<T>> params)
    : spec_(spec), params_(std::move(params)) {
  spec.Validate();
  const auto shapes = ParamShapes(spec);
  if (params_.size() != shapes.size()) {
    throw InvalidArgument("wrong number of parameter tensors");
  }
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    if (params_[i].shape() != shapes[i]) {
      throw InvalidArgument("parameter " + ParamNames()[i] + " has shape " +
                            ShapeString(params_[i].shape()) + ", expected " +
                            ShapeString(shapes[i]));
    }
  }
}

template <typename T>
const std::vector<std::string>& Network<T>::ParamNames() {
  static const std::vector<std::string> names = {"conv1.weight", "conv1.bias",
                                                 "conv2.weight", "conv2.bias",
                                                 "fc.weight",    "fc.bias"};
  return names;
}

template <typename T>
std::size_t Network<T>::ParameterCount() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.size();
  return n;
}

template <typename T>
typename Network<T>::Bound Network<T>::Bind(Graph<T>& g, bool trainable) const {
  Bound bound;
  for (const auto& p : params_) {
    bound.params.push_back(trainable ? g.Leaf(p) : g.Constant(p));
  }
  return bound;
}

template <typename T>
void Network<T>::CheckInput(const Tensor<T>& input) const {
  if (input.rank() != 4 || input.dim(0) < 1 ||
      input.dim(1) != spec_.in_channels || input.dim(2) != spec_.height ||
      input.dim(3) != spec_.width) {
    throw InvalidArgument("network input " + ShapeString(input.shape()) +
                          " does not match spec");
  }
  for (T v : input.values()) {
    if (!std::isfinite(v)) throw InvalidArgument("non-finite network input");
    if (v < T(-1) || v > T(1)) {
      throw InvalidArgument("network input outside [-1, 1]");
    }
  }
}

template <typename T>
Var Network<T>::Forward(Graph<T>& g, const Bound& b, Var input) const {
  CheckInput(g.value(input));
  const auto& p = b.params;
  Var h = AvgPool2(g, Relu(g, Conv2d(g, input, p[kConv1W], p[kConv1B])));
  h = Relu(g, Conv2d(g, h, p[kConv2W], p[kConv2B]));
  h = spec_.global_pool ? GlobalAvgPool(g, h) : Flatten(g, AvgPool2(g, h));
  return Linear(g, h, p[kFcW], p[kFcB]);
}

template <typename T>
std::pair<Var, Var> Network<T>::ForwardWithTangent(Graph<T>& g, const Bound& b,
                                                   Var input,
                                                   Var tangent) const {
  CheckInput(g.value(input));
  if (g.value(tangent).shape() != g.value(input).shape()) {
    throw InvalidArgument("tangent shape does not match input");
  }
  const auto& p = b.params;
  const Var none;
  Var a1 = Conv2d(g, input, p[kConv1W], p[kConv1B]);
  Var t1 = Conv2d(g, tangent, p[kConv1W], none);
  Var h1 = AvgPool2(g, Relu(g, a1));
  t1 = AvgPool2(g, ReluMaskLike(g, t1, a1));
  Var a2 = Conv2d(g, h1, p[kConv2W], p[kConv2B]);
  Var t2 = Conv2d(g, t1, p[kConv2W], none);
  Var h2 = Relu(g, a2);
  t2 = ReluMaskLike(g, t2, a2);
  if (spec_.global_pool) {
    h2 = GlobalAvgPool(g, h2);
    t2 = GlobalAvgPool(g, t2);
  } else {
    h2 = Flatten(g, AvgPool2(g, h2));
    t2 = Flatten(g, AvgPool2(g, t2));
  }
  Var logits = Linear(g, h2, p[kFcW], p[kFcB]);
  Var tangent_logits = Linear(g, t2, p[kFcW], none);
  return {logits, tangent_logits};
}

template <typename T>
std::vector<Tensor<T>> Network<T>::Gradients(const Graph<T>& g,
                                             const Bound& b) const {
  std::vector<Tensor<T>> grads;
  for (Var v : b.params) grads.push_back(g.grad(v));
  return grads;
}

template <typename T>
Tensor<T> Network<T>::Logits(const Tensor<T>& batch) const {
  Graph<T> g;
  const Bound b = Bind(g, /*trainable=*/false);
  return g.value(Forward(g, b, g.Constant(batch)));
}

template <typename T>
Tensor<T> MakeBatch(std::span<const Image* const> images) {
  if (images.empty()) throw InvalidArgument("empty batch");
  const Shape shape = images.front()->shape();
  const int n = static_cast<int>(images.size());
  const int plane = static_cast<int>(shape.pixels());
  Tensor<T> out({n, shape.channels, shape.height, shape.width});
  for (int i = 0; i < n; ++i) {
    const Image& img = *images[i];
    if (img.shape() != shape) throw InvalidArgument("ragged batch");
    const auto src = img.data();
    T* dst = out.data() + static_cast<std::size_t>(i) * shape.size();
    for (int p = 0; p < plane; ++p) {
      for (int c = 0; c < shape.channels; ++c) {
        dst[static_cast<std::size_t>(c) * plane + p] = static_cast<T>(
            Normalize(src[static_cast<std::size_t>(p) * shape.channels + c]));
      }
    }
  }
  return out;
}

template <typename T>
Tensor<T> MakeBatch(std::span<const Image> images) {
  std::vector<const Image*> ptrs;
  for (const auto& img : images) ptrs.push_back(&img);
  return MakeBatch<T>(std::span<const Image* const>(ptrs));
}

template <typename T>
Image ImageFromBatch(const Tensor<T>& batch, int index) {
  const int c = batch.dim(1), h = batch.dim(2), w = batch.dim(3);
  Image img({h, w, c});
  const int plane = h * w;
  const T* src = batch.data() + static_cast<std::size_t>(index) * c * plane;
  for (int p = 0; p < plane; ++p) {
    for (int ch = 0; ch < c; ++ch) {
      img.data()[static_cast<std::size_t>(p) * c + ch] = Denormalize(
          static_cast<float>(src[static_cast<std::size_t>(ch) * plane + p]));
    }
  }
  return img;
}

template <typename T>
Tensor<T> InputGradients(const Network<T>& net, const Tensor<T>& batch,
                         std::span<const int> classes) {
  Graph<T> g;
  const auto b = net.Bind(g, /*trainable=*/false);
  const Var x = g.Leaf(batch);
  const Var logits = net.Forward(g, b, x);
  g.Backward(Sum(g, SelectColumns(g, logits, classes)));
  return g.grad(x);
}

template <typename T>
Saliency SaliencyFromGradient(const Tensor<T>& gradients, int index) {
  const int c = gradients.dim(1), h = gradients.dim(2), w = gradients.dim(3);
  const int plane = h * w;
  Saliency s{h, w, std::vector<double>(plane, 0.0)};
  const T* src = gradients.data() + static_cast<std::size_t>(index) * c * plane;
  for (int p = 0; p < plane; ++p) {
    double sq = 0;
    for (int ch = 0; ch < c; ++ch) {
      const double v = src[static_cast<std::size_t>(ch) * plane + p];
      sq += v * v;
    }
    s.scores[p] = std::sqrt(sq);
  }
  return s;
}

template <typename T>
InputGradientResult<T> InputGradient(const Network<T>& net, const Image& image,
                                     int target_class) {
  if (target_class < 0 || target_class >= net.spec().num_classes) {
    throw InvalidArgument("class index " + std::to_string(target_class) +
                          " out of range");
  }
  const Image* one[] = {&image};
  const Tensor<T> batch = MakeBatch<T>(std::span<const Image* const>(one));
  const int cls[] = {target_class};
  Tensor<T> grads = InputGradients(net, batch, cls);
  Saliency sal = SaliencyFromGradient(grads, 0);
  std::vector<int> shape(grads.shape().begin() + 1, grads.shape().end());
  return {grads.Reshaped(std::move(shape)), std::move(sal)};
}

template <typename T>
bool SgdOptimizer<T>::Step(Network<T>& net, const std::vector<Tensor<T>>& grads,
                           const SgdOptions& options) {
  auto& params = net.params();
  bool ok = grads.size() == params.size();
  for (std::size_t i = 0; ok && i < grads.size(); ++i) {
    ok = grads[i].shape() == params[i].shape();
    for (T v : grads[i].values()) ok = ok && std::isfinite(v);
  }
  if (!ok) {
    ++rejected_;
    return false;
  }
  if (velocity_.size() != params.size()) {
    velocity_.clear();
    for (const auto& p : params) velocity_.emplace_back(p.shape());
  }
  const T lr = static_cast<T>(options.lr);
  const T mu = static_cast<T>(options.momentum);
  const T wd = static_cast<T>(options.weight_decay);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params[i].values();
    auto v = velocity_[i].values();
    auto gr = grads[i].values();
    for (std::size_t j = 0; j < p.size(); ++j) {
      v[j] = mu * v[j] + (gr[j] + wd * p[j]);
      p[j] -= lr * v[j];
    }
  }
  return true;
}

#define CFAUG_INSTANTIATE(T)                                                \
  template class Network<T>;                                                \
  template class SgdOptimizer<T>;                                           \
  template Tensor<T> MakeBatch<T>(std::span<const Image>);                  \
  template Tensor<T> MakeBatch<T>(std::span<const Image* const>);           \
  template Image ImageFromBatch<T>(const Tensor<T>&, int);                  \
  template Tensor<T> InputGradients<T>(const Network<T>&, const Tensor<T>&, \
                                       std::span<const int>);               \
  template Saliency SaliencyFromGradient<T>(const Tensor<T>&, int);         \
  template InputGradientResult<T> InputGradient<T>(const Network<T>&,       \
                                                   const Image&, int);

CFAUG_INSTANTIATE(float)
CFAUG_INSTANTIATE(double)

#undef CFAUG_INSTANTIATE

}  // namespace cfaug::nn
