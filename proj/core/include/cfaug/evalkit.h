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

#ifndef CFAUG_EVALKIT_H_
#define CFAUG_EVALKIT_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "cfaug/image.h"
#include "cfaug/network.h"
#include "cfaug/synthbench.h"

namespace cfaug::eval {

using synth::LabeledExample;

// Fraction of exact matches. Throws on empty or unequal inputs.
double Accuracy(std::span<const int> predictions, std::span<const int> labels);

// Index of the largest value; the first one wins ties.
int Argmax(std::span<const double> values);

// Binary ROC AUC with midranks for ties. Needs at least one positive and one
// negative.
double BinaryAuc(std::span<const double> scores,
                 std::span<const std::uint8_t> positive);

struct AucResult {
  double macro = 0.0;
  std::vector<double> per_class;  // NaN for skipped classes
  std::vector<int> skipped;       // classes absent from the labels
};

// Unweighted mean of one-vs-rest AUCs. `scores` is [N, K] row-major. Classes
// that never occur are skipped and reported; fewer than two present classes
// is an error.
AucResult MacroOvrAuc(std::span<const double> scores,
                      std::span<const int> labels, int num_classes);

// Average precision where tied scores form a single threshold group:
//   sum over groups of (new positives / P) * precision at that group.
double AveragePrecision(std::span<const double> scores,
                        std::span<const std::uint8_t> positive);

// AUPR of per-pixel saliency with foreground pixels as positives. Throws when
// the region is all foreground or all background.
double SaliencyAupr(const nn::Saliency& saliency, const Region& region);

// Class probabilities for one image.
using ProbabilityFn = std::function<std::vector<double>(const Image&)>;

// Softmax of the network logits.
ProbabilityFn NetworkProbabilities(const nn::Network<float>& net);

// Mean over pairs of p(x_mixed)[(y+1) mod K] - p(x_original)[(y+1) mod K].
// The splits must list the same examples in the same order.
double NextClassShift(const ProbabilityFn& probabilities,
                      std::span<const LabeledExample> original,
                      std::span<const LabeledExample> mixed_next,
                      int num_classes);

// Squared Pearson correlation. Throws for fewer than 2 points or constant xs;
// constant ys give 0.
double RSquared(std::span<const double> xs, std::span<const double> ys);

struct MetricReport {
  std::string split;
  double accuracy = 0.0;
  double macro_auc = 0.0;
  double saliency_aupr = 0.0;
  // NaN unless a paired Mixed-Next split was evaluated.
  double next_class_shift = 0.0;
  std::vector<double> per_class_accuracy;  // NaN for absent classes
  std::vector<double> per_class_auc;
  int aupr_skipped = 0;  // examples with a degenerate region
};

// Accuracy, macro AUC and mean ground-truth-class saliency AUPR on one
// split. When `mixed_next` is given, next_class_shift is filled in against it
// (with `examples` as the original side).
MetricReport EvaluateSplit(const nn::Network<float>& net,
                           const std::string& split,
                           std::span<const LabeledExample> examples,
                           std::span<const LabeledExample> mixed_next = {});

struct MetricRow {
  std::string model;
  std::uint64_t seed = 0;
  MetricReport report;
};

inline constexpr const char* kMetricColumns[] = {
    "model",     "seed",          "split",           "accuracy",
    "macro_auc", "saliency_aupr", "next_class_shift"};

void WriteMetricsCsv(const std::filesystem::path& path,
                     std::span<const MetricRow> rows);
std::vector<MetricRow> ReadMetricsCsv(const std::filesystem::path& path);

}  // namespace cfaug::eval

#endif  // CFAUG_EVALKIT_H_
