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

#ifndef CFAUG_AUGMENT_H_
#define CFAUG_AUGMENT_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "cfaug/image.h"
#include "cfaug/random.h"

namespace cfaug {

// Counterfactual infill choices (the foreground is replaced).
enum class CfInfill { kGrey, kRandom, kShuffle, kTile, kExternal };
// Factual infill choices (the background is replaced).
enum class FInfill { kRandom, kShuffle, kMixedRand, kFgsm };

std::string_view ToString(CfInfill method);
std::string_view ToString(FInfill method);
CfInfill ParseCfInfill(std::string_view name);
FInfill ParseFInfill(std::string_view name);

// (1 - r) * x + r * infill. Pixels with r = 0 are copied bit-for-bit.
Image ComposeCounterfactual(const Image& image, const Region& region,
                            const InfillSample& infill);

// r * x + (1 - r) * infill. Pixels with r = 1 are copied bit-for-bit.
Image ComposeFactual(const Image& image, const Region& region,
                     const InfillSample& infill);

// Every value 0.5, i.e. 0 after normalization.
InfillSample InfillGrey(const Shape& shape);

// Components of the random infill before truncation to [0, 1]: one uniform
// base value per channel, and base + N(0, 0.2^2) per pixel and channel.
struct RandomInfillParts {
  std::vector<float> base;
  std::vector<float> untruncated;
};
inline constexpr float kRandomInfillSigma = 0.2f;
RandomInfillParts SampleRandomInfill(const Shape& shape, Rng& rng);

// Truncated random infill.
InfillSample InfillRandom(const Shape& shape, Rng& rng);

enum class ShuffleMode {
  kJointPixels,  // whole channel vectors move together
  kPerChannel,   // each channel permuted independently
};

// Returns a copy of `image` whose pixels inside `region` are a uniform random
// permutation of the original region pixels. Throws on an empty region.
InfillSample InfillShuffle(const Image& image, const Region& region, Rng& rng,
                           ShuffleMode mode = ShuffleMode::kJointPixels);

// Maximum-area rectangle containing only r = 0 pixels. Among equal areas the
// one with the smallest top, then smallest left, then smallest height wins.
// Throws when the mask has no background pixel.
Rect LargestBackgroundRectangle(const Region& region);

// Full-frame tiling of the largest background rectangle A:
// out[i][j] = A[i mod a_h][j mod a_w].
InfillSample InfillTile(const Image& image, const Region& region);

// Keeps the foreground of `image` and replaces its background with the tiled
// background of the donor.
Image MixedRandBackground(const Image& image, const Region& region,
                          const Image& donor_image, const Region& donor_region);

// Reads an externally inpainted full-frame PNG and keeps only its values
// inside `region`.
Image LoadExternalInfill(const std::filesystem::path& path, const Image& image,
                         const Region& region);

}  // namespace cfaug

#endif  // CFAUG_AUGMENT_H_
