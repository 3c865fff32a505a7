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

// Central finite-difference checks of reverse-mode gradients, shared by the
// unit tests and the acceptance binary.

#ifndef CFAUG_TESTS_GRADCHECK_H_
#define CFAUG_TESTS_GRADCHECK_H_

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "cfaug/autodiff.h"
#include "cfaug/random.h"
#include "oracles.h"

namespace cfaug::testing {

struct GradCheckResult {
  double max_rel_error = 0.0;
  int checked = 0;
  int skipped = 0;  // coordinates whose one-sided slopes disagree (a kink)
};

// Compares `analytic[t][i]` with the central difference of `f` along every
// coordinate of `params` (at most `max_per_tensor` per tensor, evenly
// strided). `f` must read `params` afresh on each call.
inline GradCheckResult CheckGradients(
    std::vector<nn::Tensor<double>>& params,
    const std::vector<nn::Tensor<double>>& analytic,
    const std::function<double()>& f, double step = 1e-6,
    std::size_t max_per_tensor = 64) {
  GradCheckResult result;
  const double f0 = f();
  for (std::size_t t = 0; t < params.size(); ++t) {
    const std::size_t n = params[t].size();
    const std::size_t stride = std::max<std::size_t>(1, n / max_per_tensor);
    for (std::size_t i = 0; i < n; i += stride) {
      double& x = params[t][i];
      const double saved = x;
      x = saved + step;
      const double up = f();
      x = saved - step;
      const double down = f();
      x = saved;
      const double right = (up - f0) / step, left = (f0 - down) / step;
      // A kink inside [x - step, x + step] biases the central difference by
      // up to half the slope jump, so the jump must be small relative to the
      // gradient itself.
      if (std::abs(right - left) >
          1e-3 * std::max({1e-3, std::abs(right), std::abs(left)})) {
        ++result.skipped;
        continue;
      }
      const double numeric = (up - down) / (2.0 * step);
      result.max_rel_error = std::max(result.max_rel_error,
                                      RelativeError(analytic[t][i], numeric));
      ++result.checked;
    }
  }
  return result;
}

// Builds a scalar from leaves holding `inputs`; returns its value and the
// gradient with respect to every input.
using GraphBuilder =
    std::function<nn::Var(nn::Graph<double>&, const std::vector<nn::Var>&)>;

inline double EvaluateGraph(const GraphBuilder& build,
                            const std::vector<nn::Tensor<double>>& inputs,
                            std::vector<nn::Tensor<double>>* grads = nullptr) {
  nn::Graph<double> g;
  std::vector<nn::Var> leaves;
  for (const auto& t : inputs) leaves.push_back(g.Leaf(t));
  const nn::Var out = build(g, leaves);
  const double value = g.value(out)[0];
  if (grads != nullptr) {
    g.Backward(out);
    grads->clear();
    for (auto v : leaves) grads->push_back(g.grad(v));
  }
  return value;
}

inline GradCheckResult CheckGraph(const GraphBuilder& build,
                                  std::vector<nn::Tensor<double>> inputs) {
  std::vector<nn::Tensor<double>> analytic;
  EvaluateGraph(build, inputs, &analytic);
  return CheckGradients(inputs, analytic,
                        [&] { return EvaluateGraph(build, inputs); });
}

template <typename R>
nn::Tensor<double> RandomTensor(std::vector<int> shape, R& rng,
                                double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  nn::Tensor<double> t(std::move(shape));
  for (auto& v : t.values()) v = normal(rng);
  return t;
}

}  // namespace cfaug::testing

#endif  // CFAUG_TESTS_GRADCHECK_H_
