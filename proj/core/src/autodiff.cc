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

#include "cfaug/autodiff.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

namespace cfaug::nn {

std::string ShapeString(const std::vector<int>& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

namespace {

// Eight independent accumulators let the compiler vectorize the reduction
// without reassociating floating-point sums.
template <typename T>
T Dot(const T* a, const T* b, int n) {
  T acc[8] = {};
  int i = 0;
  for (; i + 8 <= n; i += 8) {
    for (int l = 0; l < 8; ++l) acc[l] += a[i + l] * b[i + l];
  }
  T total = ((acc[0] + acc[1]) + (acc[2] + acc[3])) +
            ((acc[4] + acc[5]) + (acc[6] + acc[7]));
  for (; i < n; ++i) total += a[i] * b[i];
  return total;
}

template <typename T>
void Axpy(T alpha, const T* x, T* y, int n) {
  for (int i = 0; i < n; ++i) y[i] += alpha * x[i];
}

template <typename T>
void RequireShape(const Tensor<T>& t, int rank, const char* what) {
  if (t.rank() != rank) {
    throw InvalidArgument(std::string(what) + ": expected rank " +
                          std::to_string(rank) + ", got " +
                          ShapeString(t.shape()));
  }
}

template <typename T>
void RequireSameShape(const Tensor<T>& a, const Tensor<T>& b,
                      const char* what) {
  if (a.shape() != b.shape()) {
    throw InvalidArgument(std::string(what) + ": shape " +
                          ShapeString(a.shape()) + " vs " +
                          ShapeString(b.shape()));
  }
}

void CheckLabels(std::span<const int> labels, int batch, int classes) {
  if (static_cast<int>(labels.size()) != batch) {
    throw InvalidArgument("label count does not match batch size");
  }
  for (int y : labels) {
    if (y < 0 || y >= classes) {
      throw InvalidArgument("label " + std::to_string(y) + " outside [0, " +
                            std::to_string(classes) + ")");
    }
  }
}

// Log-sum-exp of row[0..k) skipping column `skip` (pass -1 to keep all).
template <typename T>
T LogSumExp(const T* row, int k, int skip) {
  T m = -std::numeric_limits<T>::infinity();
  for (int j = 0; j < k; ++j) {
    if (j != skip) m = std::max(m, row[j]);
  }
  T s = 0;
  for (int j = 0; j < k; ++j) {
    if (j != skip) s += std::exp(row[j] - m);
  }
  return m + std::log(s);
}

}  // namespace

template <typename T>
const typename Graph<T>::Node& Graph<T>::node(Var v) const {
  if (!v.valid() || v.id >= static_cast<int>(nodes_.size())) {
    throw GraphError("variable does not belong to this graph");
  }
  return nodes_[v.id];
}

template <typename T>
typename Graph<T>::Node& Graph<T>::node(Var v) {
  return const_cast<Node&>(std::as_const(*this).node(v));
}

template <typename T>
Var Graph<T>::Constant(Tensor<T> value) {
  nodes_.push_back({std::move(value), {}, nullptr, false});
  return {static_cast<int>(nodes_.size()) - 1};
}

template <typename T>
Var Graph<T>::Leaf(Tensor<T> value) {
  nodes_.push_back({std::move(value), {}, nullptr, true});
  return {static_cast<int>(nodes_.size()) - 1};
}

template <typename T>
Var Graph<T>::Record(Tensor<T> value, std::initializer_list<Var> parents,
                     BackwardFn backward) {
  if (consumed_) throw GraphError("graph already consumed by Backward");
  bool needs_grad = false;
  for (Var p : parents) {
    if (p.valid()) needs_grad = needs_grad || node(p).requires_grad;
  }
  nodes_.push_back({std::move(value),
                    {},
                    needs_grad ? std::move(backward) : nullptr,
                    needs_grad});
  return {static_cast<int>(nodes_.size()) - 1};
}

template <typename T>
const Tensor<T>& Graph<T>::grad(Var v) const {
  const Node& n = node(v);
  if (n.grad.empty()) {
    // Zero gradient of the right shape, materialized on demand.
    auto& self = const_cast<Graph&>(*this);
    self.node(v).grad = Tensor<T>(n.value.shape());
  }
  return n.grad;
}

template <typename T>
Tensor<T>& Graph<T>::MutableGrad(Var v) {
  Node& n = node(v);
  if (n.grad.empty()) n.grad = Tensor<T>(n.value.shape());
  return n.grad;
}

template <typename T>
void Graph<T>::Backward(Var loss) {
  if (!loss.valid()) throw GraphError("backward called without a forward pass");
  if (consumed_) throw GraphError("graph already consumed by Backward");
  if (node(loss).value.size() != 1) {
    throw GraphError("backward requires a scalar loss, got " +
                     ShapeString(node(loss).value.shape()));
  }
  for (auto& n : nodes_) n.grad = Tensor<T>();
  MutableGrad(loss)[0] = T(1);
  for (int i = loss.id; i >= 0; --i) {
    Node& n = nodes_[i];
    if (n.requires_grad && n.backward && !n.grad.empty()) {
      n.backward(*this, Var{i});
    }
  }
  for (auto& n : nodes_) n.backward = nullptr;
  consumed_ = true;
}

template <typename T>
Var Conv2d(Graph<T>& g, Var x, Var weight, Var bias) {
  const Tensor<T>& xv = g.value(x);
  const Tensor<T>& wv = g.value(weight);
  RequireShape(xv, 4, "conv2d input");
  RequireShape(wv, 4, "conv2d weight");
  const int n_batch = xv.dim(0), chans = xv.dim(1), h = xv.dim(2),
            w = xv.dim(3);
  const int outs = wv.dim(0), k = wv.dim(2), pad = k / 2;
  if (wv.dim(1) != chans || wv.dim(3) != k || k % 2 == 0) {
    throw InvalidArgument("conv2d weight " + ShapeString(wv.shape()) +
                          " incompatible with input " +
                          ShapeString(xv.shape()));
  }
  if (bias.valid() && g.value(bias).size() != static_cast<std::size_t>(outs)) {
    throw InvalidArgument("conv2d bias size mismatch");
  }
  const int taps = chans * k * k;
  const int plane = h * w;
  auto cols = std::make_shared<std::vector<T>>(
      static_cast<std::size_t>(n_batch) * taps * plane, T(0));

  Tensor<T> out({n_batch, outs, h, w});
  for (int n = 0; n < n_batch; ++n) {
    T* col = cols->data() + static_cast<std::size_t>(n) * taps * plane;
    const T* img = xv.data() + static_cast<std::size_t>(n) * chans * plane;
    for (int c = 0; c < chans; ++c) {
      for (int ki = 0; ki < k; ++ki) {
        for (int kj = 0; kj < k; ++kj) {
          T* row =
              col + static_cast<std::size_t>((c * k + ki) * k + kj) * plane;
          for (int i = 0; i < h; ++i) {
            const int si = i + ki - pad;
            if (si < 0 || si >= h) continue;
            const T* src = img + static_cast<std::size_t>(c) * plane + si * w;
            T* dst = row + i * w;
            const int j0 = std::max(0, pad - kj);
            const int j1 = std::min(w, w + pad - kj);
            for (int j = j0; j < j1; ++j) dst[j] = src[j + kj - pad];
          }
        }
      }
    }
    T* dst = out.data() + static_cast<std::size_t>(n) * outs * plane;
    for (int o = 0; o < outs; ++o) {
      T* out_plane = dst + static_cast<std::size_t>(o) * plane;
      std::fill(out_plane, out_plane + plane,
                bias.valid() ? g.value(bias)[o] : T(0));
      const T* wrow = wv.data() + static_cast<std::size_t>(o) * taps;
      for (int t = 0; t < taps; ++t) {
        Axpy(wrow[t], col + static_cast<std::size_t>(t) * plane, out_plane,
             plane);
      }
    }
  }

  return g.Record(
      std::move(out), {x, weight, bias}, [=](Graph<T>& gr, Var self) {
        const Tensor<T>& gout = gr.grad(self);
        const Tensor<T>& wt = gr.value(weight);
        const bool need_w = gr.requires_grad(weight);
        const bool need_b = bias.valid() && gr.requires_grad(bias);
        const bool need_x = gr.requires_grad(x);
        Tensor<T>* gw = need_w ? &gr.MutableGrad(weight) : nullptr;
        Tensor<T>* gb = need_b ? &gr.MutableGrad(bias) : nullptr;
        Tensor<T>* gx = need_x ? &gr.MutableGrad(x) : nullptr;
        std::vector<T> dcol(need_x ? static_cast<std::size_t>(taps) * plane
                                   : 0);
        for (int n = 0; n < n_batch; ++n) {
          const T* col =
              cols->data() + static_cast<std::size_t>(n) * taps * plane;
          const T* go =
              gout.data() + static_cast<std::size_t>(n) * outs * plane;
          for (int o = 0; o < outs; ++o) {
            const T* go_plane = go + static_cast<std::size_t>(o) * plane;
            if (gw) {
              T* gw_row = gw->data() + static_cast<std::size_t>(o) * taps;
              for (int t = 0; t < taps; ++t) {
                gw_row[t] += Dot(
                    go_plane, col + static_cast<std::size_t>(t) * plane, plane);
              }
            }
            if (gb) {
              T s = 0;
              for (int p = 0; p < plane; ++p) s += go_plane[p];
              (*gb)[o] += s;
            }
          }
          if (!gx) continue;
          std::fill(dcol.begin(), dcol.end(), T(0));
          for (int o = 0; o < outs; ++o) {
            const T* go_plane = go + static_cast<std::size_t>(o) * plane;
            const T* wrow = wt.data() + static_cast<std::size_t>(o) * taps;
            for (int t = 0; t < taps; ++t) {
              Axpy(wrow[t], go_plane,
                   dcol.data() + static_cast<std::size_t>(t) * plane, plane);
            }
          }
          T* gimg = gx->data() + static_cast<std::size_t>(n) * chans * plane;
          for (int c = 0; c < chans; ++c) {
            for (int ki = 0; ki < k; ++ki) {
              for (int kj = 0; kj < k; ++kj) {
                const T* row =
                    dcol.data() +
                    static_cast<std::size_t>((c * k + ki) * k + kj) * plane;
                for (int i = 0; i < h; ++i) {
                  const int si = i + ki - pad;
                  if (si < 0 || si >= h) continue;
                  T* dst = gimg + static_cast<std::size_t>(c) * plane + si * w;
                  const T* src = row + i * w;
                  const int j0 = std::max(0, pad - kj);
                  const int j1 = std::min(w, w + pad - kj);
                  for (int j = j0; j < j1; ++j) dst[j + kj - pad] += src[j];
                }
              }
            }
          }
        }
      });
}

template <typename T>
Var Relu(Graph<T>& g, Var x) {
  const Tensor<T>& xv = g.value(x);
  Tensor<T> out(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) {
    out[i] = xv[i] > T(0) ? xv[i] : T(0);
  }
  return g.Record(std::move(out), {x}, [x](Graph<T>& gr, Var self) {
    const Tensor<T>& gout = gr.grad(self);
    const Tensor<T>& xv = gr.value(x);
    Tensor<T>& gx = gr.MutableGrad(x);
    for (std::size_t i = 0; i < xv.size(); ++i) {
      if (xv[i] > T(0)) gx[i] += gout[i];
    }
  });
}

template <typename T>
Var ReluMaskLike(Graph<T>& g, Var t, Var pre) {
  const Tensor<T>& tv = g.value(t);
  const Tensor<T>& pv = g.value(pre);
  RequireSameShape(tv, pv, "relu mask");
  Tensor<T> out(tv.shape());
  for (std::size_t i = 0; i < tv.size(); ++i) {
    out[i] = pv[i] > T(0) ? tv[i] : T(0);
  }
  return g.Record(std::move(out), {t}, [t, pre](Graph<T>& gr, Var self) {
    const Tensor<T>& gout = gr.grad(self);
    const Tensor<T>& pv = gr.value(pre);
    Tensor<T>& gt = gr.MutableGrad(t);
    for (std::size_t i = 0; i < pv.size(); ++i) {
      if (pv[i] > T(0)) gt[i] += gout[i];
    }
  });
}

template <typename T>
Var AvgPool2(Graph<T>& g, Var x) {
  const Tensor<T>& xv = g.value(x);
  RequireShape(xv, 4, "avgpool input");
  const int n = xv.dim(0), c = xv.dim(1), h = xv.dim(2), w = xv.dim(3);
  if (h % 2 || w % 2) throw InvalidArgument("avgpool needs even H and W");
  const int oh = h / 2, ow = w / 2;
  Tensor<T> out({n, c, oh, ow});
  const int planes = n * c;
  for (int p = 0; p < planes; ++p) {
    const T* src = xv.data() + static_cast<std::size_t>(p) * h * w;
    T* dst = out.data() + static_cast<std::size_t>(p) * oh * ow;
    for (int i = 0; i < oh; ++i) {
      for (int j = 0; j < ow; ++j) {
        const T* a = src + (2 * i) * w + 2 * j;
        dst[i * ow + j] = T(0.25) * ((a[0] + a[1]) + (a[w] + a[w + 1]));
      }
    }
  }
  return g.Record(
      std::move(out), {x}, [x, planes, h, w, oh, ow](Graph<T>& gr, Var self) {
        const Tensor<T>& gout = gr.grad(self);
        Tensor<T>& gx = gr.MutableGrad(x);
        for (int p = 0; p < planes; ++p) {
          const T* src = gout.data() + static_cast<std::size_t>(p) * oh * ow;
          T* dst = gx.data() + static_cast<std::size_t>(p) * h * w;
          for (int i = 0; i < oh; ++i) {
            for (int j = 0; j < ow; ++j) {
              const T v = T(0.25) * src[i * ow + j];
              T* a = dst + (2 * i) * w + 2 * j;
              a[0] += v;
              a[1] += v;
              a[w] += v;
              a[w + 1] += v;
            }
          }
        }
      });
}

template <typename T>
Var GlobalAvgPool(Graph<T>& g, Var x) {
  const Tensor<T>& xv = g.value(x);
  RequireShape(xv, 4, "global pool input");
  const int n = xv.dim(0), c = xv.dim(1);
  const int plane = xv.dim(2) * xv.dim(3);
  const int planes = n * c;
  Tensor<T> out({n, c});
  for (int p = 0; p < planes; ++p) {
    const T* src = xv.data() + static_cast<std::size_t>(p) * plane;
    T sum = 0;
    for (int i = 0; i < plane; ++i) sum += src[i];
    out[p] = sum / static_cast<T>(plane);
  }
  return g.Record(std::move(out), {x},
                  [x, planes, plane](Graph<T>& gr, Var self) {
                    const Tensor<T>& gout = gr.grad(self);
                    Tensor<T>& gx = gr.MutableGrad(x);
                    for (int p = 0; p < planes; ++p) {
                      const T v = gout[p] / static_cast<T>(plane);
                      T* dst = gx.data() + static_cast<std::size_t>(p) * plane;
                      for (int i = 0; i < plane; ++i) dst[i] += v;
                    }
                  });
}

template <typename T>
Var Flatten(Graph<T>& g, Var x) {
  const Tensor<T>& xv = g.value(x);
  const int n = xv.dim(0);
  const int features = static_cast<int>(xv.size() / std::max(n, 1));
  return g.Record(xv.Reshaped({n, features}), {x}, [x](Graph<T>& gr, Var self) {
    const Tensor<T>& gout = gr.grad(self);
    Tensor<T>& gx = gr.MutableGrad(x);
    for (std::size_t i = 0; i < gout.size(); ++i) {
      gx[i] += gout[i];
    }
  });
}

template <typename T>
Var Linear(Graph<T>& g, Var x, Var weight, Var bias) {
  const Tensor<T>& xv = g.value(x);
  const Tensor<T>& wv = g.value(weight);
  RequireShape(xv, 2, "linear input");
  RequireShape(wv, 2, "linear weight");
  const int n = xv.dim(0), f = xv.dim(1), k = wv.dim(0);
  if (wv.dim(1) != f) {
    throw InvalidArgument("linear weight " + ShapeString(wv.shape()) +
                          " incompatible with input " +
                          ShapeString(xv.shape()));
  }
  Tensor<T> out({n, k});
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < k; ++j) {
      out[static_cast<std::size_t>(i) * k + j] =
          (bias.valid() ? g.value(bias)[j] : T(0)) +
          Dot(xv.data() + static_cast<std::size_t>(i) * f,
              wv.data() + static_cast<std::size_t>(j) * f, f);
    }
  }
  return g.Record(
      std::move(out), {x, weight, bias},
      [x, weight, bias, n, f, k](Graph<T>& gr, Var self) {
        const Tensor<T>& gout = gr.grad(self);
        const Tensor<T>& xv = gr.value(x);
        const Tensor<T>& wv = gr.value(weight);
        Tensor<T>* gw =
            gr.requires_grad(weight) ? &gr.MutableGrad(weight) : nullptr;
        Tensor<T>* gb = bias.valid() && gr.requires_grad(bias)
                            ? &gr.MutableGrad(bias)
                            : nullptr;
        Tensor<T>* gx = gr.requires_grad(x) ? &gr.MutableGrad(x) : nullptr;
        for (int i = 0; i < n; ++i) {
          for (int j = 0; j < k; ++j) {
            const T go = gout[static_cast<std::size_t>(i) * k + j];
            if (gw) {
              Axpy(go, xv.data() + static_cast<std::size_t>(i) * f,
                   gw->data() + static_cast<std::size_t>(j) * f, f);
            }
            if (gb) (*gb)[j] += go;
            if (gx) {
              Axpy(go, wv.data() + static_cast<std::size_t>(j) * f,
                   gx->data() + static_cast<std::size_t>(i) * f, f);
            }
          }
        }
      });
}

template <typename T>
Var Add(Graph<T>& g, Var a, Var b) {
  const Tensor<T>& av = g.value(a);
  const Tensor<T>& bv = g.value(b);
  RequireSameShape(av, bv, "add");
  Tensor<T> out(av.shape());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] + bv[i];
  return g.Record(std::move(out), {a, b}, [a, b](Graph<T>& gr, Var self) {
    const Tensor<T>& gout = gr.grad(self);
    for (Var v : {a, b}) {
      if (!gr.requires_grad(v)) continue;
      Tensor<T>& gv = gr.MutableGrad(v);
      for (std::size_t i = 0; i < gout.size(); ++i) gv[i] += gout[i];
    }
  });
}

template <typename T>
Var Scale(Graph<T>& g, Var a, T factor) {
  const Tensor<T>& av = g.value(a);
  Tensor<T> out(av.shape());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] * factor;
  return g.Record(std::move(out), {a}, [a, factor](Graph<T>& gr, Var self) {
    const Tensor<T>& gout = gr.grad(self);
    Tensor<T>& ga = gr.MutableGrad(a);
    for (std::size_t i = 0; i < gout.size(); ++i) ga[i] += gout[i] * factor;
  });
}

template <typename T>
Var MulConstant(Graph<T>& g, Var a, const Tensor<T>& factor) {
  const Tensor<T>& av = g.value(a);
  RequireSameShape(av, factor, "mul");
  Tensor<T> out(av.shape());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] * factor[i];
  return g.Record(std::move(out), {a}, [a, factor](Graph<T>& gr, Var self) {
    const Tensor<T>& gout = gr.grad(self);
    Tensor<T>& ga = gr.MutableGrad(a);
    for (std::size_t i = 0; i < gout.size(); ++i) ga[i] += gout[i] * factor[i];
  });
}

template <typename T>
Var AddConstant(Graph<T>& g, Var a, T offset) {
  const Tensor<T>& av = g.value(a);
  Tensor<T> out(av.shape());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] + offset;
  return g.Record(std::move(out), {a}, [a](Graph<T>& gr, Var self) {
    const Tensor<T>& gout = gr.grad(self);
    Tensor<T>& ga = gr.MutableGrad(a);
    for (std::size_t i = 0; i < gout.size(); ++i) ga[i] += gout[i];
  });
}

template <typename T>
Var Sum(Graph<T>& g, Var a) {
  const Tensor<T>& av = g.value(a);
  T s = 0;
  for (std::size_t i = 0; i < av.size(); ++i) s += av[i];
  return g.Record(Tensor<T>({1}, std::vector<T>{s}), {a},
                  [a](Graph<T>& gr, Var self) {
                    const T go = gr.grad(self)[0];
                    Tensor<T>& ga = gr.MutableGrad(a);
                    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += go;
                  });
}

template <typename T>
Var SelectColumns(Graph<T>& g, Var x, std::span<const int> index) {
  const Tensor<T>& xv = g.value(x);
  RequireShape(xv, 2, "select");
  const int n = xv.dim(0), k = xv.dim(1);
  CheckLabels(index, n, k);
  std::vector<int> idx(index.begin(), index.end());
  Tensor<T> out({n});
  for (int i = 0; i < n; ++i)
    out[i] = xv[static_cast<std::size_t>(i) * k + idx[i]];
  return g.Record(std::move(out), {x}, [x, idx, k](Graph<T>& gr, Var self) {
    const Tensor<T>& gout = gr.grad(self);
    Tensor<T>& gx = gr.MutableGrad(x);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      gx[i * k + idx[i]] += gout[i];
    }
  });
}

template <typename T>
Tensor<T> Softmax(const Tensor<T>& logits) {
  RequireShape(logits, 2, "softmax");
  const int n = logits.dim(0), k = logits.dim(1);
  Tensor<T> out(logits.shape());
  for (int i = 0; i < n; ++i) {
    const T* row = logits.data() + static_cast<std::size_t>(i) * k;
    const T lse = LogSumExp(row, k, -1);
    for (int j = 0; j < k; ++j) {
      out[static_cast<std::size_t>(i) * k + j] = std::exp(row[j] - lse);
    }
  }
  return out;
}

template <typename T>
Var CrossEntropy(Graph<T>& g, Var logits, std::span<const int> labels) {
  const Tensor<T>& z = g.value(logits);
  RequireShape(z, 2, "cross entropy");
  const int n = z.dim(0), k = z.dim(1);
  CheckLabels(labels, n, k);
  std::vector<int> y(labels.begin(), labels.end());
  T total = 0;
  for (int i = 0; i < n; ++i) {
    const T* row = z.data() + static_cast<std::size_t>(i) * k;
    total += LogSumExp(row, k, -1) - row[y[i]];
  }
  return g.Record(Tensor<T>({1}, std::vector<T>{total / n}), {logits},
                  [logits, y, n, k](Graph<T>& gr, Var self) {
                    const T scale = gr.grad(self)[0] / n;
                    const Tensor<T> p = Softmax(gr.value(logits));
                    Tensor<T>& gz = gr.MutableGrad(logits);
                    for (int i = 0; i < n; ++i) {
                      for (int j = 0; j < k; ++j) {
                        const std::size_t at =
                            static_cast<std::size_t>(i) * k + j;
                        gz[at] += scale * (p[at] - (j == y[i] ? T(1) : T(0)));
                      }
                    }
                  });
}

template <typename T>
Var SoftCrossEntropy(Graph<T>& g, Var logits, const Tensor<T>& targets) {
  const Tensor<T>& z = g.value(logits);
  RequireShape(z, 2, "soft cross entropy");
  RequireSameShape(z, targets, "soft cross entropy targets");
  const int n = z.dim(0), k = z.dim(1);
  T total = 0;
  for (int i = 0; i < n; ++i) {
    const T* row = z.data() + static_cast<std::size_t>(i) * k;
    const T* t = targets.data() + static_cast<std::size_t>(i) * k;
    const T lse = LogSumExp(row, k, -1);
    for (int j = 0; j < k; ++j) total += t[j] * (lse - row[j]);
  }
  return g.Record(Tensor<T>({1}, std::vector<T>{total / n}), {logits},
                  [logits, targets, n, k](Graph<T>& gr, Var self) {
                    const T scale = gr.grad(self)[0] / n;
                    const Tensor<T> p = Softmax(gr.value(logits));
                    Tensor<T>& gz = gr.MutableGrad(logits);
                    for (int i = 0; i < n; ++i) {
                      T mass = 0;
                      for (int j = 0; j < k; ++j) {
                        mass += targets[static_cast<std::size_t>(i) * k + j];
                      }
                      for (int j = 0; j < k; ++j) {
                        const std::size_t at =
                            static_cast<std::size_t>(i) * k + j;
                        gz[at] += scale * (mass * p[at] - targets[at]);
                      }
                    }
                  });
}

template <typename T>
Var NotLabelNll(Graph<T>& g, Var logits, std::span<const int> labels) {
  const Tensor<T>& z = g.value(logits);
  RequireShape(z, 2, "counterfactual nll");
  const int n = z.dim(0), k = z.dim(1);
  if (k < 2) throw InvalidArgument("counterfactual loss needs K >= 2");
  CheckLabels(labels, n, k);
  std::vector<int> y(labels.begin(), labels.end());
  T total = 0;
  for (int i = 0; i < n; ++i) {
    const T* row = z.data() + static_cast<std::size_t>(i) * k;
    total += LogSumExp(row, k, -1) - LogSumExp(row, k, y[i]);
  }
  return g.Record(
      Tensor<T>({1}, std::vector<T>{total / n}), {logits},
      [logits, y, n, k](Graph<T>& gr, Var self) {
        const T scale = gr.grad(self)[0] / n;
        const Tensor<T>& z = gr.value(logits);
        Tensor<T>& gz = gr.MutableGrad(logits);
        for (int i = 0; i < n; ++i) {
          const T* row = z.data() + static_cast<std::size_t>(i) * k;
          const T lse_all = LogSumExp(row, k, -1);
          const T lse_rest = LogSumExp(row, k, y[i]);
          for (int j = 0; j < k; ++j) {
            const T p = std::exp(row[j] - lse_all);
            const T q = j == y[i] ? T(0) : std::exp(row[j] - lse_rest);
            gz[static_cast<std::size_t>(i) * k + j] += scale * (p - q);
          }
        }
      });
}

#define CFAUG_INSTANTIATE(T)                                           \
  template class Graph<T>;                                             \
  template Var Conv2d<T>(Graph<T>&, Var, Var, Var);                    \
  template Var Relu<T>(Graph<T>&, Var);                                \
  template Var ReluMaskLike<T>(Graph<T>&, Var, Var);                   \
  template Var AvgPool2<T>(Graph<T>&, Var);                            \
  template Var GlobalAvgPool<T>(Graph<T>&, Var);                       \
  template Var Flatten<T>(Graph<T>&, Var);                             \
  template Var Linear<T>(Graph<T>&, Var, Var, Var);                    \
  template Var Add<T>(Graph<T>&, Var, Var);                            \
  template Var Scale<T>(Graph<T>&, Var, T);                            \
  template Var MulConstant<T>(Graph<T>&, Var, const Tensor<T>&);       \
  template Var AddConstant<T>(Graph<T>&, Var, T);                      \
  template Var Sum<T>(Graph<T>&, Var);                                 \
  template Var SelectColumns<T>(Graph<T>&, Var, std::span<const int>); \
  template Var CrossEntropy<T>(Graph<T>&, Var, std::span<const int>);  \
  template Var SoftCrossEntropy<T>(Graph<T>&, Var, const Tensor<T>&);  \
  template Var NotLabelNll<T>(Graph<T>&, Var, std::span<const int>);   \
  template Tensor<T> Softmax<T>(const Tensor<T>&);

CFAUG_INSTANTIATE(float)
CFAUG_INSTANTIATE(double)

#undef CFAUG_INSTANTIATE

}  // namespace cfaug::nn
