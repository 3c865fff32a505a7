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

#ifndef CFAUG_AUTODIFF_H_
#define CFAUG_AUTODIFF_H_

#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "cfaug/tensor.h"

namespace cfaug::nn {

class GraphError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Handle to a node of a Graph.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

// Tape of recorded operations. Nodes are appended in topological order, so
// Backward is a single reverse sweep. A graph supports one Backward call;
// afterwards its closures are released and further calls throw.
template <typename T>
class Graph {
 public:
  using BackwardFn = std::function<void(Graph&, Var self)>;

  // Values that never receive gradients.
  Var Constant(Tensor<T> value);
  // Values whose gradients are accumulated by Backward.
  Var Leaf(Tensor<T> value);

  // Used by op implementations. The node requires a gradient if any parent
  // does; otherwise `backward` is dropped.
  Var Record(Tensor<T> value, std::initializer_list<Var> parents,
             BackwardFn backward);

  const Tensor<T>& value(Var v) const { return node(v).value; }
  bool requires_grad(Var v) const { return node(v).requires_grad; }

  // Gradient of the last Backward root with respect to `v`. Zero-filled when
  // no gradient reached the node.
  const Tensor<T>& grad(Var v) const;
  // Gradient buffer for op implementations; allocated on first use.
  Tensor<T>& MutableGrad(Var v);

  // Seeds d(loss)/d(loss) = 1 and sweeps the tape backwards. `loss` must hold
  // exactly one element.
  void Backward(Var loss);

  bool consumed() const { return consumed_; }
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor<T> value;
    Tensor<T> grad;
    BackwardFn backward;
    bool requires_grad = false;
  };

  const Node& node(Var v) const;
  Node& node(Var v);

  std::vector<Node> nodes_;
  bool consumed_ = false;
};

// 2-D convolution, stride 1, zero padding kernel/2, odd square kernels.
// x: [N, C, H, W]; weight: [O, C, k, k]; bias: [O] or invalid for none.
template <typename T>
Var Conv2d(Graph<T>& g, Var x, Var weight, Var bias);

template <typename T>
Var Relu(Graph<T>& g, Var x);

// t * 1[pre > 0]: propagates a tangent through a ReLU whose pre-activation is
// `pre`. The mask is treated as a constant.
template <typename T>
Var ReluMaskLike(Graph<T>& g, Var t, Var pre);

// 2x2 average pooling, stride 2. H and W must be even.
template <typename T>
Var AvgPool2(Graph<T>& g, Var x);

// Mean over the spatial axes: [N, C, H, W] -> [N, C].
template <typename T>
Var GlobalAvgPool(Graph<T>& g, Var x);

// [N, ...] -> [N, prod(...)]
template <typename T>
Var Flatten(Graph<T>& g, Var x);

// x: [N, F]; weight: [K, F]; bias: [K] or invalid.
template <typename T>
Var Linear(Graph<T>& g, Var x, Var weight, Var bias);

template <typename T>
Var Add(Graph<T>& g, Var a, Var b);

template <typename T>
Var Scale(Graph<T>& g, Var a, T factor);

// Elementwise product with a constant tensor of the same shape.
template <typename T>
Var MulConstant(Graph<T>& g, Var a, const Tensor<T>& factor);

template <typename T>
Var AddConstant(Graph<T>& g, Var a, T offset);

// Sum of all elements, shape {1}.
template <typename T>
Var Sum(Graph<T>& g, Var a);

// out[n] = x[n, index[n]] for x: [N, K].
template <typename T>
Var SelectColumns(Graph<T>& g, Var x, std::span<const int> index);

// Mean over the batch of -log softmax(logits)[label].
template <typename T>
Var CrossEntropy(Graph<T>& g, Var logits, std::span<const int> labels);

// Mean over the batch of -sum_k target[n,k] log softmax(logits)[n,k].
template <typename T>
Var SoftCrossEntropy(Graph<T>& g, Var logits, const Tensor<T>& targets);

// Mean over the batch of -log(1 - softmax(logits)[label]), evaluated as
// logsumexp(z) - logsumexp(z without the label column).
template <typename T>
Var NotLabelNll(Graph<T>& g, Var logits, std::span<const int> labels);

// Row-wise softmax of a [N, K] tensor (values only).
template <typename T>
Tensor<T> Softmax(const Tensor<T>& logits);

}  // namespace cfaug::nn

#endif  // CFAUG_AUTODIFF_H_
