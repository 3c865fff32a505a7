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

#include "cfaug/evalkit.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cfaug/csv.h"

namespace cfaug::eval {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr int kEvalBatch = 128;

void CheckBinaryInput(std::span<const double> scores,
                      std::span<const std::uint8_t> positive,
                      std::size_t* num_positive) {
  if (scores.size() != positive.size()) {
    throw InvalidArgument("scores and labels differ in length");
  }
  std::size_t p = 0;
  for (std::uint8_t v : positive) p += v != 0;
  if (p == 0 || p == positive.size()) {
    throw InvalidArgument("need at least one positive and one negative");
  }
  for (double s : scores) {
    if (!std::isfinite(s)) throw InvalidArgument("non-finite score");
  }
  *num_positive = p;
}

// Indices sorted by descending score.
std::vector<std::size_t> DescendingOrder(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(
      order.begin(), order.end(),
      [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

std::vector<double> SoftmaxRow(const nn::Tensor<float>& logits, int row) {
  const int k = logits.dim(1);
  std::vector<double> p(k);
  double m = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < k; ++j) {
    p[j] = logits[static_cast<std::size_t>(row) * k + j];
    m = std::max(m, p[j]);
  }
  double z = 0.0;
  for (double& v : p) z += (v = std::exp(v - m));
  for (double& v : p) v /= z;
  return p;
}

}  // namespace

double Accuracy(std::span<const int> predictions, std::span<const int> labels) {
  if (predictions.empty()) throw InvalidArgument("accuracy of empty input");
  if (predictions.size() != labels.size()) {
    throw InvalidArgument("predictions and labels differ in length");
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    hits += predictions[i] == labels[i];
  }
  return static_cast<double>(hits) / labels.size();
}

int Argmax(std::span<const double> values) {
  if (values.empty()) throw InvalidArgument("argmax of empty input");
  return static_cast<int>(std::max_element(values.begin(), values.end()) -
                          values.begin());
}

double BinaryAuc(std::span<const double> scores,
                 std::span<const std::uint8_t> positive) {
  std::size_t num_pos = 0;
  CheckBinaryInput(scores, positive, &num_pos);
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * (static_cast<double>(i + 1) + j);
    for (std::size_t t = i; t < j; ++t) {
      if (positive[order[t]]) rank_sum += midrank;
    }
    i = j;
  }
  const double p = static_cast<double>(num_pos);
  const double q = static_cast<double>(n - num_pos);
  return (rank_sum - p * (p + 1.0) / 2.0) / (p * q);
}

AucResult MacroOvrAuc(std::span<const double> scores,
                      std::span<const int> labels, int num_classes) {
  if (num_classes < 2) throw InvalidArgument("AUC needs K >= 2");
  const std::size_t n = labels.size();
  if (scores.size() != n * num_classes) {
    throw InvalidArgument("scores must have shape [N, K]");
  }
  std::vector<int> counts(num_classes, 0);
  for (int y : labels) {
    if (y < 0 || y >= num_classes) throw InvalidArgument("label out of range");
    ++counts[y];
  }
  AucResult result;
  result.per_class.assign(num_classes, kNaN);
  std::vector<double> column(n);
  std::vector<std::uint8_t> positive(n);
  double sum = 0.0;
  int used = 0;
  for (int k = 0; k < num_classes; ++k) {
    if (counts[k] == 0 || counts[k] == static_cast<int>(n)) {
      result.skipped.push_back(k);
      continue;
    }
    for (std::size_t i = 0; i < n; ++i) {
      column[i] = scores[i * num_classes + k];
      positive[i] = labels[i] == k;
    }
    result.per_class[k] = BinaryAuc(column, positive);
    sum += result.per_class[k];
    ++used;
  }
  if (used == 0) {
    throw InvalidArgument("AUC is undefined with a single class present");
  }
  result.macro = sum / used;
  return result;
}

double AveragePrecision(std::span<const double> scores,
                        std::span<const std::uint8_t> positive) {
  std::size_t num_pos = 0;
  CheckBinaryInput(scores, positive, &num_pos);
  const auto order = DescendingOrder(scores);
  double ap = 0.0;
  std::size_t tp = 0, seen = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i, group_tp = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      group_tp += positive[order[j]] != 0;
      ++j;
    }
    tp += group_tp;
    seen = j;
    if (group_tp > 0) {
      ap += static_cast<double>(group_tp) / num_pos *
            (static_cast<double>(tp) / seen);
    }
    i = j;
  }
  return ap;
}

double SaliencyAupr(const nn::Saliency& saliency, const Region& region) {
  if (saliency.height != region.height() || saliency.width != region.width() ||
      saliency.scores.size() != region.pixels()) {
    throw InvalidArgument("saliency and region shapes differ");
  }
  const std::size_t fg = region.CountForeground();
  if (fg == 0 || fg == region.pixels()) {
    throw InvalidArgument("saliency AUPR needs a non-degenerate region");
  }
  return AveragePrecision(saliency.scores, region.mask());
}

ProbabilityFn NetworkProbabilities(const nn::Network<float>& net) {
  return [&net](const Image& image) {
    const Image* batch[] = {&image};
    return SoftmaxRow(
        net.Logits(nn::MakeBatch<float>(std::span<const Image* const>(batch))),
        0);
  };
}

double NextClassShift(const ProbabilityFn& probabilities,
                      std::span<const LabeledExample> original,
                      std::span<const LabeledExample> mixed_next,
                      int num_classes) {
  if (original.size() != mixed_next.size()) {
    throw InvalidArgument("unpaired splits: sizes differ");
  }
  if (original.empty()) throw InvalidArgument("empty splits");
  double total = 0.0;
  for (std::size_t i = 0; i < original.size(); ++i) {
    const LabeledExample& a = original[i];
    const LabeledExample& b = mixed_next[i];
    if (a.label != b.label || !(a.region == b.region)) {
      throw InvalidArgument("unpaired splits at index " + std::to_string(i));
    }
    const int next = (a.label + 1) % num_classes;
    const auto pa = probabilities(a.image);
    const auto pb = probabilities(b.image);
    if (static_cast<int>(pa.size()) != num_classes ||
        static_cast<int>(pb.size()) != num_classes) {
      throw InvalidArgument("probability vector has the wrong length");
    }
    total += pb[next] - pa[next];
  }
  return total / original.size();
}

double RSquared(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size())
    throw InvalidArgument("xs and ys differ in length");
  if (xs.size() < 2) throw InvalidArgument("r_squared needs at least 2 points");
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx == 0.0) throw InvalidArgument("r_squared undefined for constant xs");
  if (syy == 0.0) return 0.0;
  return sxy * sxy / (sxx * syy);
}

MetricReport EvaluateSplit(const nn::Network<float>& net,
                           const std::string& split,
                           std::span<const LabeledExample> examples,
                           std::span<const LabeledExample> mixed_next) {
  if (examples.empty()) throw InvalidArgument("split '" + split + "' is empty");
  const int k = net.spec().num_classes;
  const std::size_t n = examples.size();
  MetricReport report;
  report.split = split;

  std::vector<double> probs;
  probs.reserve(n * k);
  std::vector<int> predictions, labels;
  double aupr_sum = 0.0;
  int aupr_count = 0;
  for (std::size_t start = 0; start < n; start += kEvalBatch) {
    const std::size_t end = std::min(n, start + kEvalBatch);
    std::vector<const Image*> images;
    std::vector<int> batch_labels;
    for (std::size_t i = start; i < end; ++i) {
      images.push_back(&examples[i].image);
      batch_labels.push_back(examples[i].label);
    }
    const auto batch =
        nn::MakeBatch<float>(std::span<const Image* const>(images));
    const auto logits = net.Logits(batch);
    for (std::size_t i = 0; i < images.size(); ++i) {
      const auto p = SoftmaxRow(logits, static_cast<int>(i));
      predictions.push_back(Argmax(p));
      probs.insert(probs.end(), p.begin(), p.end());
    }
    labels.insert(labels.end(), batch_labels.begin(), batch_labels.end());

    const auto grads = nn::InputGradients(net, batch, batch_labels);
    for (std::size_t i = 0; i < images.size(); ++i) {
      const Region& region = examples[start + i].region;
      const std::size_t fg = region.CountForeground();
      if (fg == 0 || fg == region.pixels()) {
        ++report.aupr_skipped;
        continue;
      }
      aupr_sum += SaliencyAupr(
          nn::SaliencyFromGradient(grads, static_cast<int>(i)), region);
      ++aupr_count;
    }
  }

  report.accuracy = Accuracy(predictions, labels);
  std::vector<int> hits(k, 0), counts(k, 0);
  for (std::size_t i = 0; i < n; ++i) {
    ++counts[labels[i]];
    hits[labels[i]] += predictions[i] == labels[i];
  }
  for (int c = 0; c < k; ++c) {
    report.per_class_accuracy.push_back(
        counts[c] ? static_cast<double>(hits[c]) / counts[c] : kNaN);
  }
  try {
    const AucResult auc = MacroOvrAuc(probs, labels, k);
    report.macro_auc = auc.macro;
    report.per_class_auc = auc.per_class;
  } catch (const InvalidArgument&) {
    report.macro_auc = kNaN;
    report.per_class_auc.assign(k, kNaN);
  }
  report.saliency_aupr = aupr_count ? aupr_sum / aupr_count : kNaN;
  report.next_class_shift =
      mixed_next.empty()
          ? kNaN
          : NextClassShift(NetworkProbabilities(net), examples, mixed_next, k);
  return report;
}

void WriteMetricsCsv(const std::filesystem::path& path,
                     std::span<const MetricRow> rows) {
  CsvTable table;
  table.header.assign(std::begin(kMetricColumns), std::end(kMetricColumns));
  for (const MetricRow& row : rows) {
    const MetricReport& r = row.report;
    table.AddRow({row.model, std::to_string(row.seed), r.split,
                  FormatDouble(r.accuracy), FormatDouble(r.macro_auc),
                  FormatDouble(r.saliency_aupr),
                  FormatDouble(r.next_class_shift)});
  }
  WriteCsv(path, table);
}

std::vector<MetricRow> ReadMetricsCsv(const std::filesystem::path& path) {
  const CsvTable table = ReadCsv(path);
  std::vector<std::size_t> col;
  for (const char* name : kMetricColumns) col.push_back(table.Column(name));
  std::vector<MetricRow> rows;
  for (const auto& fields : table.rows) {
    MetricRow row;
    row.model = fields[col[0]];
    try {
      row.seed = std::stoull(fields[col[1]]);
    } catch (const std::exception&) {
      throw InvalidArgument("bad seed '" + fields[col[1]] + "' in " +
                            path.string());
    }
    row.report.split = fields[col[2]];
    row.report.accuracy = ParseDouble(fields[col[3]]);
    row.report.macro_auc = ParseDouble(fields[col[4]]);
    row.report.saliency_aupr = ParseDouble(fields[col[5]]);
    row.report.next_class_shift = ParseDouble(fields[col[6]]);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace cfaug::eval
