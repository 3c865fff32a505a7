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

#ifndef CFAUG_OBJECTIVES_H_
#define CFAUG_OBJECTIVES_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "cfaug/augment.h"
#include "cfaug/autodiff.h"
#include "cfaug/network.h"
#include "cfaug/synthbench.h"

namespace cfaug::loss {

using synth::LabeledExample;

// Counterfactual loss variants:
//   1: -log(1 - p_y)
//   2: KL(uniform over K || p)
//   3: KL(uniform over the K-1 classes other than y || p)
enum class CfVariant { kNotLabel = 1, kUniform = 2, kUniformExceptLabel = 3 };

CfVariant ParseCfVariant(int value);

struct LossConfig {
  bool cf_enabled = false;
  CfInfill cf_infill = CfInfill::kGrey;
  CfVariant cf_variant = CfVariant::kNotLabel;
  bool cf_use_bbox = true;  // counterfactual region = bounding box of mask

  bool f_enabled = false;
  FInfill f_infill = FInfill::kShuffle;
  bool f_use_bbox = false;    // factual region = exact mask
  double fgsm_epsilon = 0.5;  // l-inf budget in normalized [-1, 1] units

  bool sal_enabled = false;
  double lambda_sal = 0.0;

  double mixup_alpha = 0.0;      // 0 disables mixup
  double label_smoothing = 0.0;  // 0 disables smoothing

  // Directory of <id>.png full-frame inpaintings for CfInfill::kExternal.
  std::filesystem::path external_infill_dir;

  void Validate() const;
};

// Graph-level losses (all averaged over the batch).
template <typename T>
nn::Var CounterfactualLoss(nn::Graph<T>& g, nn::Var logits,
                           std::span<const int> labels, CfVariant variant);

// Cross entropy against (1 - eps) on y and eps / (K - 1) elsewhere.
template <typename T>
nn::Var LabelSmoothCrossEntropy(nn::Graph<T>& g, nn::Var logits,
                                std::span<const int> labels, double epsilon);

// Scalar forms on a single logit vector, evaluated in double precision.
double CrossEntropyValue(std::span<const double> logits, int label);
double CounterfactualLossValue(std::span<const double> logits, int label,
                               CfVariant variant);
double LabelSmoothValue(std::span<const double> logits, int label,
                        double epsilon);

// lambda * sum_j g_j^2 (1 - r_j) / sum_j (1 - r_j), summing over every
// coordinate j (channels included, region broadcast across channels).
// `gradient` is laid out [C, H, W]. Zero when the background is empty.
double SaliencyPenaltyFromGradient(std::span<const double> gradient,
                                   int channels, const Region& region,
                                   double lambda);

// Penalty for one image using the target-class logit's input gradient.
template <typename T>
double SaliencyPenalty(const nn::Network<T>& net, const Image& image,
                       const Region& region, int label, double lambda);

// FGSM restricted to the background: in normalized space
//   x' = clamp(x + eps * sign(dCE/dx) * (1 - r), -1, 1).
// Foreground pixels are copied from the input unchanged.
template <typename T>
std::vector<Image> FgsmBackground(const nn::Network<T>& net,
                                  std::span<const Image* const> images,
                                  std::span<const Region* const> regions,
                                  std::span<const int> labels, double epsilon);

template <typename T>
Image FgsmBackground(const nn::Network<T>& net, const Image& image,
                     const Region& region, int label, double epsilon);

// lambda * x_i + (1 - lambda) * x_partner[i].
template <typename T>
struct MixedBatch {
  nn::Tensor<T> inputs;
  std::vector<int> partner;
  double lambda = 1.0;
};

template <typename T>
MixedBatch<T> MixupWithLambda(const nn::Tensor<T>& batch,
                              std::vector<int> partner, double lambda);

// lambda ~ Beta(alpha, alpha); partners are a random permutation.
template <typename T>
MixedBatch<T> Mixup(const nn::Tensor<T>& batch, double alpha, Rng& rng);

// Deterministic counterfactual images (grey, tile, external) keyed by id.
class InfillCache {
 public:
  const Image* Find(const std::string& id) const;
  const Image& Insert(const std::string& id, Image image);

 private:
  std::map<std::string, Image> images_;
};

// Region used for counterfactual / factual composition under `config`.
Region CounterfactualRegion(const LabeledExample& ex, const LossConfig& config);
Region FactualRegion(const LabeledExample& ex, const LossConfig& config);

// phi_cf(x, r) with the configured infill. Throws for degenerate masks.
Image MakeCounterfactual(const LabeledExample& ex, const LossConfig& config,
                         Rng& rng, InfillCache* cache = nullptr);

// Phi_f(x, r) for random, shuffle and mixed-rand infills (FGSM needs the
// network; see FgsmBackground). For mixed-rand the donor is drawn from batch
// members of another class; returns false when there is none.
bool MakeFactual(const LabeledExample& ex,
                 std::span<const LabeledExample* const> batch,
                 const LossConfig& config, Rng& rng, Image* out);

struct LossBreakdown {
  double ce = 0.0;
  double cf = 0.0;
  double factual = 0.0;
  double sal = 0.0;
  double total = 0.0;
  int cf_skipped = 0;       // degenerate masks
  int factual_skipped = 0;  // e.g. no different-class donor in the batch
};

// Which configured terms participate in a TotalLoss evaluation.
struct LossTerms {
  bool ce = true;
  bool cf = true;
  bool factual = true;
  bool sal = true;
};

template <typename T>
struct LossResult {
  LossBreakdown losses;
  std::vector<nn::Tensor<T>> grads;  // parameter gradients of losses.total
};

// L = L_CE + L_cf + L_CE(Phi_f) + L_Sal over the batch. Every term draws its
// randomness from its own stream derived from `step_seed`, so toggling one
// term never changes another's value.
template <typename T>
LossResult<T> TotalLoss(const nn::Network<T>& net,
                        std::span<const LabeledExample* const> batch,
                        const LossConfig& config, std::uint64_t step_seed,
                        InfillCache* cache = nullptr, LossTerms terms = {});

}  // namespace cfaug::loss

#endif  // CFAUG_OBJECTIVES_H_
