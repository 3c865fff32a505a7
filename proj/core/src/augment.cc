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

#include "cfaug/augment.h"

#include <algorithm>
#include <numeric>
#include <stack>
#include <utility>

#include "cfaug/png_io.h"

namespace cfaug {
namespace {

template <typename Enum, std::size_t N>
Enum ParseEnum(std::string_view name,
               const std::pair<Enum, std::string_view> (&table)[N],
               std::string_view what) {
  for (const auto& [value, label] : table) {
    if (label == name) return value;
  }
  throw InvalidArgument("unknown " + std::string(what) + " '" +
                        std::string(name) + "'");
}

constexpr std::pair<CfInfill, std::string_view> kCfNames[] = {
    {CfInfill::kGrey, "grey"},         {CfInfill::kRandom, "random"},
    {CfInfill::kShuffle, "shuffle"},   {CfInfill::kTile, "tile"},
    {CfInfill::kExternal, "external"},
};

constexpr std::pair<FInfill, std::string_view> kFNames[] = {
    {FInfill::kRandom, "random"},
    {FInfill::kShuffle, "shuffle"},
    {FInfill::kMixedRand, "mixed-rand"},
    {FInfill::kFgsm, "fgsm"},
};

// Selects, per pixel, between two images according to the mask.
Image Select(const Image& where_zero, const Image& where_one,
             const Region& region) {
  Image out = where_zero;
  const int channels = out.channels();
  for (int r = 0; r < out.height(); ++r) {
    for (int c = 0; c < out.width(); ++c) {
      if (!region.at(r, c)) continue;
      auto dst = out.pixel(r, c);
      auto src = where_one.pixel(r, c);
      std::copy(src.begin(), src.begin() + channels, dst.begin());
    }
  }
  return out;
}

}  // namespace

std::string_view ToString(CfInfill method) {
  for (const auto& [value, label] : kCfNames) {
    if (value == method) return label;
  }
  return "?";
}

std::string_view ToString(FInfill method) {
  for (const auto& [value, label] : kFNames) {
    if (value == method) return label;
  }
  return "?";
}

CfInfill ParseCfInfill(std::string_view name) {
  return ParseEnum(name, kCfNames, "counterfactual infill");
}

FInfill ParseFInfill(std::string_view name) {
  return ParseEnum(name, kFNames, "factual infill");
}

Image ComposeCounterfactual(const Image& image, const Region& region,
                            const InfillSample& infill) {
  CheckSameShape(image, region);
  CheckSameShape(image, infill);
  return Select(image, infill, region);
}

Image ComposeFactual(const Image& image, const Region& region,
                     const InfillSample& infill) {
  CheckSameShape(image, region);
  CheckSameShape(image, infill);
  return Select(infill, image, region);
}

InfillSample InfillGrey(const Shape& shape) { return Image(shape, 0.5f); }

RandomInfillParts SampleRandomInfill(const Shape& shape, Rng& rng) {
  if (!shape.valid()) throw InvalidArgument("invalid shape for random infill");
  RandomInfillParts parts;
  std::uniform_real_distribution<float> uniform(0.0f, 1.0f);
  std::normal_distribution<float> noise(0.0f, kRandomInfillSigma);
  parts.base.resize(shape.channels);
  for (auto& b : parts.base) b = uniform(rng);
  parts.untruncated.resize(shape.size());
  for (std::size_t i = 0; i < parts.untruncated.size(); ++i) {
    parts.untruncated[i] = parts.base[i % shape.channels] + noise(rng);
  }
  return parts;
}

InfillSample InfillRandom(const Shape& shape, Rng& rng) {
  RandomInfillParts parts = SampleRandomInfill(shape, rng);
  for (auto& v : parts.untruncated) v = std::clamp(v, 0.0f, 1.0f);
  return Image(shape, std::move(parts.untruncated));
}

InfillSample InfillShuffle(const Image& image, const Region& region, Rng& rng,
                           ShuffleMode mode) {
  CheckSameShape(image, region);
  std::vector<std::pair<int, int>> coords;
  for (int r = 0; r < image.height(); ++r) {
    for (int c = 0; c < image.width(); ++c) {
      if (region.at(r, c)) coords.emplace_back(r, c);
    }
  }
  if (coords.empty()) throw InvalidArgument("shuffle over an empty region");

  Image out = image;
  const int passes = mode == ShuffleMode::kJointPixels ? 1 : image.channels();
  for (int pass = 0; pass < passes; ++pass) {
    std::vector<std::size_t> perm(coords.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t i = 0; i < coords.size(); ++i) {
      const auto [dr, dc] = coords[i];
      const auto [sr, sc] = coords[perm[i]];
      if (mode == ShuffleMode::kJointPixels) {
        auto src = image.pixel(sr, sc);
        std::copy(src.begin(), src.end(), out.pixel(dr, dc).begin());
      } else {
        out.at(dr, dc, pass) = image.at(sr, sc, pass);
      }
    }
  }
  return out;
}

Rect LargestBackgroundRectangle(const Region& region) {
  const int height = region.height();
  const int width = region.width();
  std::vector<int> run(width, 0);  // background run length ending at row
  Rect best;
  auto better = [&](const Rect& cand) {
    if (cand.area() != best.area()) return cand.area() > best.area();
    if (cand.top != best.top) return cand.top < best.top;
    if (cand.left != best.left) return cand.left < best.left;
    return cand.height < best.height;
  };

  std::vector<int> stack;
  for (int row = 0; row < height; ++row) {
    for (int col = 0; col < width; ++col) {
      run[col] = region.at(row, col) ? 0 : run[col] + 1;
    }
    stack.clear();
    // Each popped bar yields the widest rectangle of its height; every
    // maximum-area rectangle appears among these candidates.
    for (int col = 0; col <= width; ++col) {
      const int h = col < width ? run[col] : 0;
      while (!stack.empty() && run[stack.back()] >= h) {
        const int bar = stack.back();
        stack.pop_back();
        const int bar_height = run[bar];
        if (bar_height == 0) continue;
        const int left = stack.empty() ? 0 : stack.back() + 1;
        const Rect cand{row - bar_height + 1, left, bar_height, col - left};
        if (better(cand)) best = cand;
      }
      stack.push_back(col);
    }
  }
  if (best.area() == 0) {
    throw InvalidArgument("degenerate mask: no background pixel");
  }
  return best;
}

InfillSample InfillTile(const Image& image, const Region& region) {
  CheckSameShape(image, region);
  const Rect patch = LargestBackgroundRectangle(region);
  Image out(image.shape());
  for (int r = 0; r < image.height(); ++r) {
    const int src_r = patch.top + r % patch.height;
    for (int c = 0; c < image.width(); ++c) {
      const int src_c = patch.left + c % patch.width;
      auto src = image.pixel(src_r, src_c);
      std::copy(src.begin(), src.end(), out.pixel(r, c).begin());
    }
  }
  return out;
}

Image MixedRandBackground(const Image& image, const Region& region,
                          const Image& donor_image,
                          const Region& donor_region) {
  CheckSameShape(image, donor_image);
  return ComposeFactual(image, region, InfillTile(donor_image, donor_region));
}

Image LoadExternalInfill(const std::filesystem::path& path, const Image& image,
                         const Region& region) {
  CheckSameShape(image, region);
  const Image external = ReadPngImage(path);
  if (external.shape() != image.shape()) {
    throw InvalidArgument("external infill " + path.string() + " has shape " +
                          ToString(external.shape()) + ", expected " +
                          ToString(image.shape()));
  }
  return ComposeCounterfactual(image, region, external);
}

}  // namespace cfaug
