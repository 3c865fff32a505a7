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

#ifndef CFAUG_NETWORK_H_
#define CFAUG_NETWORK_H_

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cfaug/autodiff.h"
#include "cfaug/image.h"
#include "cfaug/tensor.h"

namespace cfaug::nn {

// conv3x3(in->conv1) -> relu -> avgpool2 -> conv3x3(conv1->conv2) -> relu ->
// pool -> dense(num_classes), where the second pool is a 2x2 average or,
// with global_pool, a mean over all positions. height and width must be
// multiples of 4.
struct NetworkSpec {
  int in_channels = 3;
  int height = 32;
  int width = 32;
  int num_classes = 5;
  int conv1 = 8;
  int conv2 = 16;
  bool global_pool = false;

  void Validate() const;
  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

template <typename T>
class Network {
 public:
  // Parameters bound into one graph.
  struct Bound {
    std::vector<Var> params;  // same order as Network::params()
  };

  Network() = default;
  // He-normal weights from `seed`, zero biases.
  Network(const NetworkSpec& spec, std::uint64_t seed);
  Network(const NetworkSpec& spec, std::vector<Tensor<T>> params);

  const NetworkSpec& spec() const { return spec_; }
  std::vector<Tensor<T>>& params() { return params_; }
  const std::vector<Tensor<T>>& params() const { return params_; }
  static const std::vector<std::string>& ParamNames();
  std::size_t ParameterCount() const;

  template <typename U>
  Network<U> Cast() const {
    std::vector<Tensor<U>> cast;
    for (const auto& p : params_) cast.push_back(p.template Cast<U>());
    return Network<U>(spec_, std::move(cast));
  }

  // Constant bindings skip gradient bookkeeping.
  Bound Bind(Graph<T>& g, bool trainable = true) const;

  // input: [N, C, H, W] in normalized [-1, 1] space. Throws on non-finite or
  // out-of-range values and on shape mismatch.
  Var Forward(Graph<T>& g, const Bound& bound, Var input) const;

  // Logits together with their directional derivative along `tangent`
  // (same shape as the input). ReLU masks of the tangent pass come from the
  // primal pass, so reverse-mode through the pair yields exact mixed
  // derivatives for a piecewise-linear network.
  std::pair<Var, Var> ForwardWithTangent(Graph<T>& g, const Bound& bound,
                                         Var input, Var tangent) const;

  // Parameter gradients after g.Backward, in params() order.
  std::vector<Tensor<T>> Gradients(const Graph<T>& g, const Bound& bound) const;

  // Logits without gradient bookkeeping.
  Tensor<T> Logits(const Tensor<T>& batch) const;

  friend bool operator==(const Network&, const Network&) = default;

 private:
  void CheckInput(const Tensor<T>& input) const;

  NetworkSpec spec_;
  std::vector<Tensor<T>> params_;
};

// Stacks images into a [N, C, H, W] tensor, mapping [0,1] to [-1,1].
template <typename T>
Tensor<T> MakeBatch(std::span<const Image> images);
template <typename T>
Tensor<T> MakeBatch(std::span<const Image* const> images);

// Inverse of MakeBatch for sample `index`.
template <typename T>
Image ImageFromBatch(const Tensor<T>& batch, int index);

// Per-pixel l2 norm across channels of an input gradient.
struct Saliency {
  int height = 0;
  int width = 0;
  std::vector<double> scores;
};

template <typename T>
struct InputGradientResult {
  Tensor<T> raw;  // [C, H, W] gradient with respect to the normalized input
  Saliency saliency;
};

// d logit[classes[n]] / d input for every sample, as a [N, C, H, W] tensor.
template <typename T>
Tensor<T> InputGradients(const Network<T>& net, const Tensor<T>& batch,
                         std::span<const int> classes);

// Single-image convenience wrapper around InputGradients.
template <typename T>
InputGradientResult<T> InputGradient(const Network<T>& net, const Image& image,
                                     int target_class);

// Saliency of sample `index` of a [N, C, H, W] gradient tensor.
template <typename T>
Saliency SaliencyFromGradient(const Tensor<T>& gradients, int index);

struct SgdOptions {
  double lr = 0.05;
  double momentum = 0.9;
  double weight_decay = 0.0;
};

// Momentum SGD with the decay term folded into the gradient:
//   v <- momentum * v + (g + weight_decay * p);  p <- p - lr * v
template <typename T>
class SgdOptimizer {
 public:
  // Returns false, leaving parameters and velocity untouched, when any
  // gradient is non-finite or shapes do not match.
  bool Step(Network<T>& net, const std::vector<Tensor<T>>& grads,
            const SgdOptions& options);

  const std::vector<Tensor<T>>& velocity() const { return velocity_; }
  int rejected_steps() const { return rejected_; }

 private:
  std::vector<Tensor<T>> velocity_;
  int rejected_ = 0;
};

}  // namespace cfaug::nn

#endif  // CFAUG_NETWORK_H_
