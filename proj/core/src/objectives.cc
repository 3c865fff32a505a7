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

#include "cfaug/objectives.h"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cfaug::loss {

using nn::Graph;
using nn::Tensor;
using nn::Var;

namespace {

enum StreamTag : std::uint64_t {
  kMixupStream = 0xa11,
  kCounterfactualStream = 0xcf,
  kFactualStream = 0xf0,
};

template <typename T>
Tensor<T> SmoothedTargets(std::span<const int> labels, int classes,
                          double epsilon) {
  const int n = static_cast<int>(labels.size());
  Tensor<T> targets({n, classes});
  const T off = static_cast<T>(epsilon / (classes - 1));
  const T on = static_cast<T>(1.0 - epsilon);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < classes; ++k) {
      targets[static_cast<std::size_t>(i) * classes + k] =
          k == labels[i] ? on : off;
    }
  }
  return targets;
}

double EvaluateScalar(std::span<const double> logits,
                      const std::function<Var(Graph<double>&, Var)>& loss) {
  Graph<double> g;
  const Var z = g.Constant(
      Tensor<double>({1, static_cast<int>(logits.size())},
                     std::vector<double>(logits.begin(), logits.end())));
  return g.value(loss(g, z))[0];
}

}  // namespace

CfVariant ParseCfVariant(int value) {
  if (value < 1 || value > 3) {
    throw InvalidArgument("counterfactual loss variant must be 1, 2 or 3");
  }
  return static_cast<CfVariant>(value);
}

void LossConfig::Validate() const {
  if (!(lambda_sal >= 0.0)) throw InvalidArgument("lambda_sal must be >= 0");
  if (!(fgsm_epsilon >= 0.0))
    throw InvalidArgument("fgsm epsilon must be >= 0");
  if (!(mixup_alpha >= 0.0)) throw InvalidArgument("mixup alpha must be >= 0");
  if (!(label_smoothing >= 0.0 && label_smoothing < 1.0)) {
    throw InvalidArgument("label smoothing must be in [0, 1)");
  }
  if (cf_enabled && cf_infill == CfInfill::kExternal &&
      external_infill_dir.empty()) {
    throw InvalidArgument("external counterfactual infill needs a directory");
  }
}

template <typename T>
Var CounterfactualLoss(Graph<T>& g, Var logits, std::span<const int> labels,
                       CfVariant variant) {
  const Tensor<T>& z = g.value(logits);
  const int n = z.dim(0), k = z.dim(1);
  switch (variant) {
    case CfVariant::kNotLabel:
      return nn::NotLabelNll(g, logits, labels);
    case CfVariant::kUniform: {
      Tensor<T> uniform({n, k}, static_cast<T>(1.0 / k));
      return nn::AddConstant(g, nn::SoftCrossEntropy(g, logits, uniform),
                             static_cast<T>(-std::log(static_cast<double>(k))));
    }
    case CfVariant::kUniformExceptLabel: {
      if (k < 2) throw InvalidArgument("variant 3 needs K >= 2");
      if (static_cast<int>(labels.size()) != n) {
        throw InvalidArgument("label count does not match batch size");
      }
      Tensor<T> target({n, k}, static_cast<T>(1.0 / (k - 1)));
      for (int i = 0; i < n; ++i) {
        if (labels[i] < 0 || labels[i] >= k) {
          throw InvalidArgument("label out of range");
        }
        target[static_cast<std::size_t>(i) * k + labels[i]] = T(0);
      }
      return nn::AddConstant(
          g, nn::SoftCrossEntropy(g, logits, target),
          static_cast<T>(-std::log(static_cast<double>(k - 1))));
    }
  }
  throw InvalidArgument("invalid counterfactual loss variant");
}

template <typename T>
Var LabelSmoothCrossEntropy(Graph<T>& g, Var logits,
                            std::span<const int> labels, double epsilon) {
  if (!(epsilon >= 0.0 && epsilon < 1.0)) {
    throw InvalidArgument("label smoothing must be in [0, 1)");
  }
  const Tensor<T>& z = g.value(logits);
  const int k = z.dim(1);
  if (static_cast<int>(labels.size()) != z.dim(0)) {
    throw InvalidArgument("label count does not match batch size");
  }
  for (int y : labels) {
    if (y < 0 || y >= k) throw InvalidArgument("label out of range");
  }
  if (epsilon == 0.0) return nn::CrossEntropy(g, logits, labels);
  return nn::SoftCrossEntropy(g, logits,
                              SmoothedTargets<T>(labels, k, epsilon));
}

double CrossEntropyValue(std::span<const double> logits, int label) {
  const int y[] = {label};
  return EvaluateScalar(logits, [&](Graph<double>& g, Var z) {
    return nn::CrossEntropy(g, z, y);
  });
}

double CounterfactualLossValue(std::span<const double> logits, int label,
                               CfVariant variant) {
  const int y[] = {label};
  return EvaluateScalar(logits, [&](Graph<double>& g, Var z) {
    return CounterfactualLoss(g, z, y, variant);
  });
}

double LabelSmoothValue(std::span<const double> logits, int label,
                        double epsilon) {
  const int y[] = {label};
  return EvaluateScalar(logits, [&](Graph<double>& g, Var z) {
    return LabelSmoothCrossEntropy(g, z, y, epsilon);
  });
}

double SaliencyPenaltyFromGradient(std::span<const double> gradient,
                                   int channels, const Region& region,
                                   double lambda) {
  const std::size_t plane = region.pixels();
  if (gradient.size() != plane * channels) {
    throw InvalidArgument("gradient size does not match region");
  }
  double numerator = 0.0;
  std::size_t background = 0;
  for (int c = 0; c < channels; ++c) {
    for (std::size_t p = 0; p < plane; ++p) {
      if (region.mask()[p]) continue;
      const double v = gradient[c * plane + p];
      numerator += v * v;
      ++background;
    }
  }
  if (background == 0) return 0.0;
  return lambda * numerator / static_cast<double>(background);
}

template <typename T>
double SaliencyPenalty(const nn::Network<T>& net, const Image& image,
                       const Region& region, int label, double lambda) {
  CheckSameShape(image, region);
  if (lambda == 0.0) return 0.0;
  const auto result = nn::InputGradient(net, image, label);
  std::vector<double> grad(result.raw.values().begin(),
                           result.raw.values().end());
  return SaliencyPenaltyFromGradient(grad, image.channels(), region, lambda);
}

template <typename T>
std::vector<Image> FgsmBackground(const nn::Network<T>& net,
                                  std::span<const Image* const> images,
                                  std::span<const Region* const> regions,
                                  std::span<const int> labels, double epsilon) {
  if (!(epsilon >= 0.0)) throw InvalidArgument("fgsm epsilon must be >= 0");
  if (images.size() != regions.size() || images.size() != labels.size()) {
    throw InvalidArgument("fgsm: batch components differ in length");
  }
  std::vector<Image> out;
  out.reserve(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) {
    CheckSameShape(*images[i], *regions[i]);
    out.push_back(*images[i]);
  }
  if (epsilon == 0.0 || images.empty()) return out;

  const Tensor<T> x = nn::MakeBatch<T>(images);
  Graph<T> g;
  const auto bound = net.Bind(g, /*trainable=*/false);
  const Var input = g.Leaf(x);
  g.Backward(nn::CrossEntropy(g, net.Forward(g, bound, input), labels));
  const Tensor<T>& grad = g.grad(input);

  const int channels = x.dim(1);
  const int plane = x.dim(2) * x.dim(3);
  for (std::size_t n = 0; n < out.size(); ++n) {
    Image& img = out[n];
    const Region& region = *regions[n];
    for (int p = 0; p < plane; ++p) {
      if (region.mask()[p]) continue;
      const int row = p / img.width(), col = p % img.width();
      for (int c = 0; c < channels; ++c) {
        const std::size_t at = (n * channels + c) * plane + p;
        const double s = grad[at] > T(0) ? 1.0 : (grad[at] < T(0) ? -1.0 : 0.0);
        if (s == 0.0) continue;
        const double shifted = std::clamp(
            2.0 * static_cast<double>(img.at(row, col, c)) - 1.0 + epsilon * s,
            -1.0, 1.0);
        img.at(row, col, c) = static_cast<float>(0.5 * (shifted + 1.0));
      }
    }
  }
  return out;
}

template <typename T>
Image FgsmBackground(const nn::Network<T>& net, const Image& image,
                     const Region& region, int label, double epsilon) {
  const Image* images[] = {&image};
  const Region* regions[] = {&region};
  const int labels[] = {label};
  return std::move(FgsmBackground(net, std::span<const Image* const>(images),
                                  std::span<const Region* const>(regions),
                                  labels, epsilon)
                       .front());
}

template <typename T>
MixedBatch<T> MixupWithLambda(const Tensor<T>& batch, std::vector<int> partner,
                              double lambda) {
  const int n = batch.dim(0);
  if (n < 2) throw InvalidArgument("mixup needs a batch of at least 2");
  if (static_cast<int>(partner.size()) != n) {
    throw InvalidArgument("mixup partner list does not match batch");
  }
  const std::size_t stride = batch.size() / n;
  MixedBatch<T> out{Tensor<T>(batch.shape()), std::move(partner), lambda};
  const T a = static_cast<T>(lambda), b = static_cast<T>(1.0 - lambda);
  for (int i = 0; i < n; ++i) {
    const T* xi = batch.data() + i * stride;
    const T* xj = batch.data() + out.partner[i] * stride;
    T* dst = out.inputs.data() + i * stride;
    for (std::size_t k = 0; k < stride; ++k) {
      dst[k] = std::clamp(a * xi[k] + b * xj[k], T(-1), T(1));
    }
  }
  return out;
}

template <typename T>
MixedBatch<T> Mixup(const Tensor<T>& batch, double alpha, Rng& rng) {
  if (!(alpha > 0.0)) throw InvalidArgument("mixup alpha must be > 0");
  const int n = batch.dim(0);
  if (n < 2) throw InvalidArgument("mixup needs a batch of at least 2");
  std::gamma_distribution<double> gamma(alpha, 1.0);
  const double u = gamma(rng), v = gamma(rng);
  const double lambda = u + v > 0.0 ? u / (u + v) : 0.5;
  std::vector<int> partner(n);
  std::iota(partner.begin(), partner.end(), 0);
  std::shuffle(partner.begin(), partner.end(), rng);
  return MixupWithLambda(batch, std::move(partner), lambda);
}

const Image* InfillCache::Find(const std::string& id) const {
  auto it = images_.find(id);
  return it == images_.end() ? nullptr : &it->second;
}

const Image& InfillCache::Insert(const std::string& id, Image image) {
  return images_.insert_or_assign(id, std::move(image)).first->second;
}

Region CounterfactualRegion(const LabeledExample& ex,
                            const LossConfig& config) {
  return config.cf_use_bbox ? ex.region.BoundingBoxRegion() : ex.region;
}

Region FactualRegion(const LabeledExample& ex, const LossConfig& config) {
  return config.f_use_bbox ? ex.region.BoundingBoxRegion() : ex.region;
}

Image MakeCounterfactual(const LabeledExample& ex, const LossConfig& config,
                         Rng& rng, InfillCache* cache) {
  const Region region = CounterfactualRegion(ex, config);
  if (region.CountForeground() == 0) {
    throw InvalidArgument("counterfactual of an empty causal region");
  }
  const bool deterministic = config.cf_infill == CfInfill::kGrey ||
                             config.cf_infill == CfInfill::kTile ||
                             config.cf_infill == CfInfill::kExternal;
  const std::string key = std::string(ToString(config.cf_infill)) + "/" +
                          (config.cf_use_bbox ? "bbox/" : "mask/") + ex.id;
  if (deterministic && cache) {
    if (const Image* hit = cache->Find(key)) return *hit;
  }
  Image out;
  switch (config.cf_infill) {
    case CfInfill::kGrey:
      out =
          ComposeCounterfactual(ex.image, region, InfillGrey(ex.image.shape()));
      break;
    case CfInfill::kRandom:
      out = ComposeCounterfactual(ex.image, region,
                                  InfillRandom(ex.image.shape(), rng));
      break;
    case CfInfill::kShuffle:
      out = ComposeCounterfactual(ex.image, region,
                                  InfillShuffle(ex.image, region, rng));
      break;
    case CfInfill::kTile:
      out =
          ComposeCounterfactual(ex.image, region, InfillTile(ex.image, region));
      break;
    case CfInfill::kExternal:
      out = LoadExternalInfill(config.external_infill_dir / (ex.id + ".png"),
                               ex.image, region);
      break;
  }
  if (deterministic && cache) return cache->Insert(key, std::move(out));
  return out;
}

bool MakeFactual(const LabeledExample& ex,
                 std::span<const LabeledExample* const> batch,
                 const LossConfig& config, Rng& rng, Image* out) {
  const Region region = FactualRegion(ex, config);
  switch (config.f_infill) {
    case FInfill::kRandom:
      *out =
          ComposeFactual(ex.image, region, InfillRandom(ex.image.shape(), rng));
      return true;
    case FInfill::kShuffle: {
      const Region background = region.Complement();
      if (background.CountForeground() == 0) {
        *out = ex.image;
        return true;
      }
      *out = ComposeFactual(ex.image, region,
                            InfillShuffle(ex.image, background, rng));
      return true;
    }
    case FInfill::kMixedRand: {
      std::vector<const LabeledExample*> donors;
      for (const LabeledExample* other : batch) {
        if (other->label != ex.label && other->region.CountBackground() > 0) {
          donors.push_back(other);
        }
      }
      if (donors.empty()) return false;
      std::uniform_int_distribution<std::size_t> pick(0, donors.size() - 1);
      const LabeledExample& donor = *donors[pick(rng)];
      *out = MixedRandBackground(ex.image, region, donor.image,
                                 FactualRegion(donor, config));
      return true;
    }
    case FInfill::kFgsm:
      throw InvalidArgument("FGSM factual images need the network");
  }
  return false;
}

template <typename T>
LossResult<T> TotalLoss(const nn::Network<T>& net,
                        std::span<const LabeledExample* const> batch,
                        const LossConfig& config, std::uint64_t step_seed,
                        InfillCache* cache, LossTerms terms) {
  config.Validate();
  if (batch.empty()) throw InvalidArgument("empty training batch");
  const int n = static_cast<int>(batch.size());
  const int classes = net.spec().num_classes;

  std::vector<int> labels;
  std::vector<const Image*> images;
  for (const LabeledExample* ex : batch) {
    labels.push_back(ex->label);
    images.push_back(&ex->image);
  }
  const Tensor<T> x = nn::MakeBatch<T>(images);

  Graph<T> g;
  const auto bound = net.Bind(g);
  LossBreakdown out;
  Var total;
  auto accumulate = [&](Var term) {
    total = total.valid() ? nn::Add(g, total, term) : term;
  };

  Var clean_logits;
  if (terms.sal && config.sal_enabled && config.lambda_sal > 0.0) {
    // The parameter gradient of lambda * sum_j m_j g_j^2 / M equals that of
    // the directional derivative of the target logit along the frozen
    // direction 2 * lambda * m * g / M.
    const Tensor<T> grads = nn::InputGradients(net, x, labels);
    Tensor<T> direction(x.shape());
    const int channels = x.dim(1);
    const std::size_t plane = static_cast<std::size_t>(x.dim(2)) * x.dim(3);
    double penalty_sum = 0.0;
    for (int i = 0; i < n; ++i) {
      const Region& region = batch[i]->region;
      const std::size_t background = region.CountBackground() * channels;
      if (background == 0) continue;
      double sq = 0.0;
      const double scale =
          2.0 * config.lambda_sal / (static_cast<double>(n) * background);
      for (int c = 0; c < channels; ++c) {
        for (std::size_t p = 0; p < plane; ++p) {
          if (region.mask()[p]) continue;
          const std::size_t at =
              (static_cast<std::size_t>(i) * channels + c) * plane + p;
          const double v = grads[at];
          sq += v * v;
          direction[at] = static_cast<T>(scale * v);
        }
      }
      penalty_sum += config.lambda_sal * sq / background;
    }
    out.sal = penalty_sum / n;
    auto [logits, tangent_logits] = net.ForwardWithTangent(
        g, bound, g.Constant(x), g.Constant(std::move(direction)));
    clean_logits = logits;
    accumulate(nn::Sum(g, nn::SelectColumns(g, tangent_logits, labels)));
  }

  if (terms.ce) {
    Var ce;
    if (config.mixup_alpha > 0.0) {
      Rng rng(DeriveSeed(step_seed, {kMixupStream}));
      const MixedBatch<T> mixed = Mixup(x, config.mixup_alpha, rng);
      const Tensor<T> own =
          SmoothedTargets<T>(labels, classes, config.label_smoothing);
      Tensor<T> targets(own.shape());
      const T a = static_cast<T>(mixed.lambda);
      for (int i = 0; i < n; ++i) {
        for (int k = 0; k < classes; ++k) {
          const std::size_t at = static_cast<std::size_t>(i) * classes + k;
          const std::size_t other =
              static_cast<std::size_t>(mixed.partner[i]) * classes + k;
          targets[at] = a * own[at] + (T(1) - a) * own[other];
        }
      }
      ce = nn::SoftCrossEntropy(
          g, net.Forward(g, bound, g.Constant(mixed.inputs)), targets);
    } else {
      if (!clean_logits.valid()) {
        clean_logits = net.Forward(g, bound, g.Constant(x));
      }
      ce = LabelSmoothCrossEntropy(g, clean_logits, labels,
                                   config.label_smoothing);
    }
    out.ce = static_cast<double>(g.value(ce)[0]);
    accumulate(ce);
  }

  if (terms.cf && config.cf_enabled) {
    Rng rng(DeriveSeed(step_seed, {kCounterfactualStream}));
    std::vector<Image> cf_images;
    std::vector<int> cf_labels;
    for (const LabeledExample* ex : batch) {
      try {
        cf_images.push_back(MakeCounterfactual(*ex, config, rng, cache));
        cf_labels.push_back(ex->label);
      } catch (const InvalidArgument&) {
        ++out.cf_skipped;
      }
    }
    if (!cf_images.empty()) {
      const Var logits = net.Forward(
          g, bound,
          g.Constant(nn::MakeBatch<T>(std::span<const Image>(cf_images))));
      const Var cf =
          CounterfactualLoss(g, logits, cf_labels, config.cf_variant);
      out.cf = static_cast<double>(g.value(cf)[0]);
      accumulate(cf);
    }
  }

  if (terms.factual && config.f_enabled) {
    Rng rng(DeriveSeed(step_seed, {kFactualStream}));
    std::vector<Image> f_images;
    std::vector<int> f_labels;
    if (config.f_infill == FInfill::kFgsm) {
      std::vector<Region> regions;
      for (const LabeledExample* ex : batch) {
        regions.push_back(FactualRegion(*ex, config));
      }
      std::vector<const Region*> region_ptrs;
      for (const auto& r : regions) region_ptrs.push_back(&r);
      f_images = FgsmBackground(net, std::span<const Image* const>(images),
                                std::span<const Region* const>(region_ptrs),
                                labels, config.fgsm_epsilon);
      f_labels = labels;
    } else {
      for (const LabeledExample* ex : batch) {
        Image img;
        bool ok = false;
        try {
          ok = MakeFactual(*ex, batch, config, rng, &img);
        } catch (const InvalidArgument&) {
          ok = false;
        }
        if (!ok) {
          ++out.factual_skipped;
          continue;
        }
        f_images.push_back(std::move(img));
        f_labels.push_back(ex->label);
      }
    }
    if (!f_images.empty()) {
      const Var logits = net.Forward(
          g, bound,
          g.Constant(nn::MakeBatch<T>(std::span<const Image>(f_images))));
      const Var fl = nn::CrossEntropy(g, logits, f_labels);
      out.factual = static_cast<double>(g.value(fl)[0]);
      accumulate(fl);
    }
  }

  out.total = out.ce + out.cf + out.factual + out.sal;
  LossResult<T> result;
  result.losses = out;
  if (total.valid()) {
    g.Backward(total);
    result.grads = net.Gradients(g, bound);
  } else {
    for (const auto& p : net.params()) result.grads.emplace_back(p.shape());
  }
  return result;
}

#define CFAUG_INSTANTIATE(T)                                               \
  template Var CounterfactualLoss<T>(Graph<T>&, Var, std::span<const int>, \
                                     CfVariant);                           \
  template Var LabelSmoothCrossEntropy<T>(Graph<T>&, Var,                  \
                                          std::span<const int>, double);   \
  template double SaliencyPenalty<T>(const nn::Network<T>&, const Image&,  \
                                     const Region&, int, double);          \
  template std::vector<Image> FgsmBackground<T>(                           \
      const nn::Network<T>&, std::span<const Image* const>,                \
      std::span<const Region* const>, std::span<const int>, double);       \
  template Image FgsmBackground<T>(const nn::Network<T>&, const Image&,    \
                                   const Region&, int, double);            \
  template MixedBatch<T> MixupWithLambda<T>(const Tensor<T>&,              \
                                            std::vector<int>, double);     \
  template MixedBatch<T> Mixup<T>(const Tensor<T>&, double, Rng&);         \
  template LossResult<T> TotalLoss<T>(                                     \
      const nn::Network<T>&, std::span<const LabeledExample* const>,       \
      const LossConfig&, std::uint64_t, InfillCache*, LossTerms);

CFAUG_INSTANTIATE(float)
CFAUG_INSTANTIATE(double)

#undef CFAUG_INSTANTIATE

}  // namespace cfaug::loss
