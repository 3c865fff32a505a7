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

#ifndef CFAUG_SYNTHBENCH_H_
#define CFAUG_SYNTHBENCH_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "cfaug/image.h"
#include "cfaug/random.h"

namespace cfaug::synth {

inline constexpr int kMaxClasses = 10;

// Parameters of a synthetic spurious-correlation dataset. Each class owns a
// glyph shape (the causal feature) and a background pattern (the spurious
// one); `correlation` is the probability that an example is rendered on its
// own class's background.
struct SynthSpec {
  int num_classes = 5;
  int image_size = 32;
  int channels = 3;
  int samples_per_class = 1000;
  double correlation = 0.95;
  // Glyph side as a fraction of the image side, drawn uniformly per example.
  double glyph_min_fraction = 0.45;
  double glyph_max_fraction = 0.7;
  // Fraction of the free space (image side minus glyph side) over which the
  // glyph's top-left corner is drawn, centred; 1 allows any position.
  double position_jitter = 0.3;
  // Std of the per-pixel background noise.
  double background_noise = 0.04;
  std::uint64_t seed = 0;

  void Validate() const;
};

struct LabeledExample {
  std::string id;
  Image image;
  Region region;  // exact glyph pixels
  int label = 0;
  int background_class = 0;
};

enum class SplitMode { kOriginal, kMixedSame, kMixedRand, kMixedNext, kFlip };

std::string_view ToString(SplitMode mode);
SplitMode ParseSplitMode(std::string_view name);

// Glyph `cls` rasterized into a size x size box (pixel centres inside the
// shape are foreground).
Region RenderGlyph(int cls, int size);

// Mixing weight in [0, 1] between the two background colours of pattern
// `cls` at (row, col) for phase offsets (phase_r, phase_c).
float BackgroundPattern(int cls, int row, int col, int phase_r, int phase_c);

// Balanced dataset: example i has label i % K. Ids are
// "<id_prefix><zero-padded index>". Values are quantized to 8 bits so that the
// dataset survives a PNG round trip unchanged.
std::vector<LabeledExample> GenerateDataset(const SynthSpec& spec,
                                            std::string_view id_prefix = "");

// Examples whose background matches their label.
std::vector<LabeledExample> FilterOriginal(
    const std::vector<LabeledExample>& examples);

// Rebuilds every example's background from a donor whose background class is
// the same class (MixedSame), a uniformly random other class (MixedRand), or
// (y + 1) mod K (MixedNext). Foreground, region and label are preserved.
std::vector<LabeledExample> BuildMixedSplit(
    const std::vector<LabeledExample>& examples, SplitMode mode,
    int num_classes, Rng& rng);

struct FlipSplit {
  std::vector<LabeledExample> original;  // background_class == label
  std::vector<LabeledExample> flip;      // background_class != label
};

// Partitions by background agreement. When natural mismatches are fewer than
// the matched examples, matched examples receive a donor background of
// another class until both partitions have equal size.
FlipSplit BuildFlipSplit(const std::vector<LabeledExample>& examples, Rng& rng);

}  // namespace cfaug::synth

#endif  // CFAUG_SYNTHBENCH_H_
