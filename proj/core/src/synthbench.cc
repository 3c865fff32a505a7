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

#include "cfaug/synthbench.h"

#include <algorithm>
#include <cmath>

#include "cfaug/augment.h"
#include "cfaug/png_io.h"

namespace cfaug::synth {
namespace {

constexpr std::pair<SplitMode, std::string_view> kSplitNames[] = {
    {SplitMode::kOriginal, "original"},
    {SplitMode::kMixedSame, "mixed_same"},
    {SplitMode::kMixedRand, "mixed_rand"},
    {SplitMode::kMixedNext, "mixed_next"},
    {SplitMode::kFlip, "flip"},
};

// Inside-test of glyph `cls` at normalized coordinates u, v in [-1, 1]
// (v grows downwards).
bool InsideGlyph(int cls, double u, double v) {
  const double au = std::abs(u), av = std::abs(v);
  const double linf = std::max(au, av);
  const double r = std::hypot(u, v);
  switch (cls) {
    case 0:  // disk
      return r <= 0.95;
    case 1:  // square
      return linf <= 0.8;
    case 2:  // triangle, apex up
      return v >= -0.85 && v <= 0.85 && au <= 0.95 * (v + 0.85) / 1.7;
    case 3:  // plus
      return (au <= 0.28 && av <= 0.95) || (av <= 0.28 && au <= 0.95);
    case 4:  // ring
      return r >= 0.5 && r <= 0.95;
    case 5:  // diamond
      return au + av <= 0.95;
    case 6:  // x
      return linf <= 0.9 && (std::abs(u - v) <= 0.4 || std::abs(u + v) <= 0.4);
    case 7:  // hollow square
      return linf >= 0.5 && linf <= 0.9;
    case 8:  // T
      return (v >= -0.95 && v <= -0.45 && au <= 0.95) ||
             (au <= 0.25 && av <= 0.95);
    case 9:  // L
      return (u >= -0.95 && u <= -0.45 && av <= 0.95) ||
             (v >= 0.45 && v <= 0.95 && au <= 0.95);
    default:
      throw InvalidArgument("no glyph for class " + std::to_string(cls));
  }
}

std::vector<float> DrawColour(int channels, Rng& rng,
                              const std::vector<std::vector<float>>& avoid) {
  std::uniform_real_distribution<float> unit(0.0f, 1.0f);
  std::vector<float> colour(channels);
  for (int attempt = 0;; ++attempt) {
    for (auto& c : colour) c = unit(rng);
    bool ok = true;
    for (const auto& other : avoid) {
      float dist = 0;
      for (int c = 0; c < channels; ++c) dist += std::abs(colour[c] - other[c]);
      ok = ok && dist / channels >= 0.25f;
    }
    if (ok || attempt > 1000) return colour;
  }
}

LabeledExample SwapBackground(const LabeledExample& target,
                              const LabeledExample& donor,
                              std::string_view suffix) {
  LabeledExample out = target;
  out.id = target.id + "_" + std::string(suffix);
  out.image = MixedRandBackground(target.image, target.region, donor.image,
                                  donor.region);
  out.background_class = donor.background_class;
  return out;
}

const LabeledExample& PickDonor(const std::vector<LabeledExample>& examples,
                                std::size_t self, int background_class,
                                Rng& rng) {
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    if (i != self && examples[i].background_class == background_class) {
      pool.push_back(i);
    }
  }
  if (pool.empty()) {
    throw InvalidArgument("insufficient donors with background class " +
                          std::to_string(background_class));
  }
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  return examples[pool[pick(rng)]];
}

}  // namespace

void SynthSpec::Validate() const {
  if (num_classes < 2 || num_classes > kMaxClasses) {
    throw InvalidArgument("num_classes must be in [2, " +
                          std::to_string(kMaxClasses) + "]");
  }
  if (image_size < 8) throw InvalidArgument("image_size must be >= 8");
  if (channels != 1 && channels != 3) {
    throw InvalidArgument("channels must be 1 or 3");
  }
  if (samples_per_class < 1) {
    throw InvalidArgument("samples_per_class must be >= 1");
  }
  if (!(correlation >= 0.0 && correlation <= 1.0)) {
    throw InvalidArgument("correlation must be in [0, 1]");
  }
  if (!(glyph_min_fraction > 0.0) || glyph_min_fraction > glyph_max_fraction) {
    throw InvalidArgument("invalid glyph size range");
  }
  if (glyph_max_fraction > 1.0) {
    throw InvalidArgument("glyph larger than image");
  }
  if (!(position_jitter >= 0.0 && position_jitter <= 1.0)) {
    throw InvalidArgument("position_jitter must be in [0, 1]");
  }
  if (background_noise < 0.0) {
    throw InvalidArgument("background_noise must be >= 0");
  }
}

std::string_view ToString(SplitMode mode) {
  for (const auto& [m, name] : kSplitNames) {
    if (m == mode) return name;
  }
  return "?";
}

SplitMode ParseSplitMode(std::string_view name) {
  for (const auto& [m, label] : kSplitNames) {
    if (label == name) return m;
  }
  throw InvalidArgument("unknown split '" + std::string(name) + "'");
}

Region RenderGlyph(int cls, int size) {
  if (size < 1) throw InvalidArgument("glyph size must be positive");
  Region glyph(size, size);
  for (int r = 0; r < size; ++r) {
    for (int c = 0; c < size; ++c) {
      const double u = 2.0 * (c + 0.5) / size - 1.0;
      const double v = 2.0 * (r + 0.5) / size - 1.0;
      glyph.set(r, c, InsideGlyph(cls, u, v));
    }
  }
  return glyph;
}

float BackgroundPattern(int cls, int row, int col, int phase_r, int phase_c) {
  const int r = row + phase_r;
  const int c = col + phase_c;
  switch (cls) {
    case 0:  // horizontal stripes
      return (r / 2) % 2;
    case 1:  // vertical stripes
      return (c / 2) % 2;
    case 2:  // diagonal stripes
      return ((r + c) / 2) % 2;
    case 3:  // anti-diagonal stripes
      return ((r - c + 4096) / 2) % 2;
    case 4:  // checkerboard
      return ((r / 2) + (c / 2)) % 2;
    case 5:  // dots
      return (r % 4 == 0 && c % 4 == 0) ? 1.0f : 0.0f;
    case 6:  // wide horizontal stripes
      return (r / 4) % 2;
    case 7:  // wide vertical stripes
      return (c / 4) % 2;
    case 8:  // grid lines
      return (r % 4 == 0 || c % 4 == 0) ? 1.0f : 0.0f;
    case 9:  // large checkerboard
      return ((r / 4) + (c / 4)) % 2;
    default:
      throw InvalidArgument("no background for class " + std::to_string(cls));
  }
}

std::vector<LabeledExample> GenerateDataset(const SynthSpec& spec,
                                            std::string_view id_prefix) {
  spec.Validate();
  const int k = spec.num_classes;
  const int n = spec.image_size;
  const int total = k * spec.samples_per_class;
  const int width = std::max(6, static_cast<int>(std::to_string(total).size()));
  std::vector<LabeledExample> out;
  out.reserve(total);

  for (int i = 0; i < total; ++i) {
    Rng rng(DeriveSeed(spec.seed, {0x5e17ULL, static_cast<std::uint64_t>(i)}));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    LabeledExample ex;
    ex.label = i % k;
    if (unit(rng) < spec.correlation) {
      ex.background_class = ex.label;
    } else {
      std::uniform_int_distribution<int> other(0, k - 2);
      const int o = other(rng);
      ex.background_class = o >= ex.label ? o + 1 : o;
    }

    const auto colour_a = DrawColour(spec.channels, rng, {});
    const auto colour_b = DrawColour(spec.channels, rng, {colour_a});
    const auto glyph_colour =
        DrawColour(spec.channels, rng, {colour_a, colour_b});
    std::uniform_int_distribution<int> phase(0, 7);
    const int phase_r = phase(rng), phase_c = phase(rng);

    ex.image = Image({n, n, spec.channels});
    std::normal_distribution<float> noise(
        0.0f, static_cast<float>(spec.background_noise));
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) {
        const float w =
            BackgroundPattern(ex.background_class, r, c, phase_r, phase_c);
        for (int ch = 0; ch < spec.channels; ++ch) {
          const float base = colour_a[ch] + w * (colour_b[ch] - colour_a[ch]);
          const float jitter = spec.background_noise > 0 ? noise(rng) : 0.0f;
          ex.image.at(r, c, ch) = std::clamp(base + jitter, 0.0f, 1.0f);
        }
      }
    }

    const double frac =
        spec.glyph_min_fraction +
        unit(rng) * (spec.glyph_max_fraction - spec.glyph_min_fraction);
    const int size = std::clamp(static_cast<int>(std::lround(frac * n)), 3, n);
    const int free = n - size;
    const int span = static_cast<int>(std::lround(spec.position_jitter * free));
    const int lo = (free - span) / 2;
    std::uniform_int_distribution<int> offset(lo, lo + span);
    const int top = offset(rng), left = offset(rng);
    const Region glyph = RenderGlyph(ex.label, size);
    ex.region = Region(n, n);
    for (int r = 0; r < size; ++r) {
      for (int c = 0; c < size; ++c) {
        if (!glyph.at(r, c)) continue;
        ex.region.set(top + r, left + c, true);
        for (int ch = 0; ch < spec.channels; ++ch) {
          ex.image.at(top + r, left + c, ch) = glyph_colour[ch];
        }
      }
    }
    QuantizeTo8Bit(ex.image);

    std::string digits = std::to_string(i);
    digits.insert(0, width - std::min<int>(width, digits.size()), '0');
    ex.id = std::string(id_prefix) + digits;
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<LabeledExample> FilterOriginal(
    const std::vector<LabeledExample>& examples) {
  std::vector<LabeledExample> out;
  for (const auto& ex : examples) {
    if (ex.background_class == ex.label) out.push_back(ex);
  }
  return out;
}

std::vector<LabeledExample> BuildMixedSplit(
    const std::vector<LabeledExample>& examples, SplitMode mode,
    int num_classes, Rng& rng) {
  if (mode != SplitMode::kMixedSame && mode != SplitMode::kMixedRand &&
      mode != SplitMode::kMixedNext) {
    throw InvalidArgument("BuildMixedSplit needs a mixed split mode");
  }
  if (num_classes < 2) throw InvalidArgument("mixed splits need K >= 2");
  std::vector<LabeledExample> out;
  out.reserve(examples.size());
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const LabeledExample& ex = examples[i];
    int donor_class = ex.label;
    if (mode == SplitMode::kMixedNext) {
      donor_class = (ex.label + 1) % num_classes;
    } else if (mode == SplitMode::kMixedRand) {
      std::uniform_int_distribution<int> other(0, num_classes - 2);
      const int o = other(rng);
      donor_class = o >= ex.label ? o + 1 : o;
    }
    const LabeledExample& donor = PickDonor(examples, i, donor_class, rng);
    out.push_back(SwapBackground(ex, donor, ToString(mode)));
  }
  return out;
}

FlipSplit BuildFlipSplit(const std::vector<LabeledExample>& examples,
                         Rng& rng) {
  FlipSplit split;
  for (const auto& ex : examples) {
    (ex.background_class == ex.label ? split.original : split.flip)
        .push_back(ex);
  }
  if (split.original.empty()) {
    throw InvalidArgument("flip split: no example with a matching background");
  }
  for (std::size_t i = 0; split.flip.size() < split.original.size(); ++i) {
    const LabeledExample& target = split.original[i];
    std::vector<std::size_t> pool;
    for (std::size_t j = 0; j < examples.size(); ++j) {
      if (examples[j].background_class != target.label) pool.push_back(j);
    }
    if (pool.empty()) {
      throw InvalidArgument(
          "flip split: no donor with a mismatched background");
    }
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    split.flip.push_back(
        SwapBackground(target, examples[pool[pick(rng)]], "flip"));
  }
  return split;
}

}  // namespace cfaug::synth
