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

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>

#include "cfaug/png_io.h"
#include "oracles.h"

namespace cfaug {
namespace {

using testing::BruteForceLargestBackgroundRect;
using testing::RandomImage;
using testing::RandomRegion;

std::vector<std::vector<float>> SortedPixels(const Image& image,
                                             const Region& region) {
  std::vector<std::vector<float>> pixels;
  for (int r = 0; r < image.height(); ++r) {
    for (int c = 0; c < image.width(); ++c) {
      if (!region.at(r, c)) continue;
      auto p = image.pixel(r, c);
      pixels.emplace_back(p.begin(), p.end());
    }
  }
  std::sort(pixels.begin(), pixels.end());
  return pixels;
}

TEST(InfillNamesTest, RoundTrip) {
  for (auto m : {CfInfill::kGrey, CfInfill::kRandom, CfInfill::kShuffle,
                 CfInfill::kTile, CfInfill::kExternal}) {
    EXPECT_EQ(ParseCfInfill(ToString(m)), m);
  }
  for (auto m : {FInfill::kRandom, FInfill::kShuffle, FInfill::kMixedRand,
                 FInfill::kFgsm}) {
    EXPECT_EQ(ParseFInfill(ToString(m)), m);
  }
  EXPECT_THROW(ParseCfInfill("blur"), InvalidArgument);
  EXPECT_THROW(ParseFInfill("grey"), InvalidArgument);
}

TEST(ComposeTest, PixelPreservationAndDuality) {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    std::uniform_int_distribution<int> side(1, 9);
    const Shape shape{side(rng), side(rng), trial % 2 ? 3 : 1};
    const Image x = RandomImage(shape, rng);
    const Image infill = RandomImage(shape, rng);
    const Region region = RandomRegion(shape.height, shape.width, 0.4, rng);
    const Image cf = ComposeCounterfactual(x, region, infill);
    const Image f = ComposeFactual(x, region, infill);
    EXPECT_EQ(cf, ComposeFactual(x, region.Complement(), infill));
    for (int r = 0; r < shape.height; ++r) {
      for (int c = 0; c < shape.width; ++c) {
        for (int ch = 0; ch < shape.channels; ++ch) {
          const float keep = x.at(r, c, ch), fill = infill.at(r, c, ch);
          EXPECT_EQ(cf.at(r, c, ch), region.at(r, c) ? fill : keep);
          EXPECT_EQ(f.at(r, c, ch), region.at(r, c) ? keep : fill);
        }
      }
    }
  }
}

TEST(ComposeTest, ShapeMismatchThrows) {
  Image x(Shape{4, 4, 3});
  EXPECT_THROW(ComposeCounterfactual(x, Region(4, 5), x), InvalidArgument);
  EXPECT_THROW(ComposeFactual(x, Region(4, 4), Image(Shape{4, 4, 1})),
               InvalidArgument);
}

TEST(InfillGreyTest, AllHalf) {
  const Image grey = InfillGrey(Shape{3, 2, 3});
  for (float v : grey.data()) EXPECT_EQ(v, 0.5f);
}

TEST(InfillRandomTest, TruncatedAroundPerChannelBase) {
  const Shape shape{40, 40, 3};
  Rng rng(3);
  const RandomInfillParts parts = SampleRandomInfill(shape, rng);
  ASSERT_EQ(parts.base.size(), 3u);
  for (int ch = 0; ch < 3; ++ch) {
    double sum = 0, sq = 0;
    for (std::size_t i = ch; i < parts.untruncated.size(); i += 3) {
      const double d = parts.untruncated[i] - parts.base[ch];
      sum += d;
      sq += d * d;
    }
    const double n = shape.pixels();
    EXPECT_NEAR(sum / n, 0.0, 0.03);
    EXPECT_NEAR(std::sqrt(sq / n), kRandomInfillSigma, 0.02);
  }
  Rng again(3);
  const Image infill = InfillRandom(shape, again);
  EXPECT_TRUE(infill.InRange());
  for (std::size_t i = 0; i < parts.untruncated.size(); ++i) {
    EXPECT_EQ(infill.data()[i], std::clamp(parts.untruncated[i], 0.0f, 1.0f));
  }
}

TEST(InfillShuffleTest, MultisetPreservedAndOutsideUntouched) {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const Shape shape{7, 6, 3};
    const Image x = RandomImage(shape, rng);
    Region region = RandomRegion(7, 6, 0.5, rng);
    region.set(0, 0, true);
    const Image joint =
        InfillShuffle(x, region, rng, ShuffleMode::kJointPixels);
    EXPECT_EQ(SortedPixels(joint, region), SortedPixels(x, region));
    const Image per = InfillShuffle(x, region, rng, ShuffleMode::kPerChannel);
    for (int ch = 0; ch < 3; ++ch) {
      std::vector<float> a, b;
      for (int r = 0; r < 7; ++r) {
        for (int c = 0; c < 6; ++c) {
          if (!region.at(r, c)) {
            EXPECT_EQ(joint.pixel(r, c)[ch], x.pixel(r, c)[ch]);
            EXPECT_EQ(per.pixel(r, c)[ch], x.pixel(r, c)[ch]);
            continue;
          }
          a.push_back(per.at(r, c, ch));
          b.push_back(x.at(r, c, ch));
        }
      }
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      EXPECT_EQ(a, b);
    }
  }
}

TEST(InfillShuffleTest, EmptyRegionThrows) {
  Rng rng(1);
  EXPECT_THROW(InfillShuffle(Image(Shape{3, 3, 1}), Region(3, 3), rng),
               InvalidArgument);
}

TEST(LargestBackgroundRectangleTest, MatchesBruteForce) {
  Rng rng(17);
  std::uniform_int_distribution<int> side(1, 12);
  std::uniform_real_distribution<double> density(0.0, 0.8);
  for (int trial = 0; trial < 300; ++trial) {
    Region region = RandomRegion(side(rng), side(rng), density(rng), rng);
    if (region.CountBackground() == 0) continue;
    EXPECT_EQ(LargestBackgroundRectangle(region),
              BruteForceLargestBackgroundRect(region));
  }
}

TEST(LargestBackgroundRectangleTest, TieBreaks) {
  // Two disjoint 1x2 strips; the upper one wins.
  Region region(3, 2, std::vector<std::uint8_t>{0, 0, 1, 1, 0, 0});
  EXPECT_EQ(LargestBackgroundRectangle(region), (Rect{0, 0, 1, 2}));
  // Same top, 2x1 and 1x2: the shorter one (1x2) wins.
  Region square(2, 2, std::vector<std::uint8_t>{0, 0, 0, 1});
  EXPECT_EQ(LargestBackgroundRectangle(square), (Rect{0, 0, 1, 2}));
}

TEST(LargestBackgroundRectangleTest, AllForegroundThrows) {
  EXPECT_THROW(LargestBackgroundRectangle(Region(3, 3, 1)), InvalidArgument);
}

TEST(InfillTileTest, ModularPeriod) {
  Rng rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const Shape shape{9, 11, 3};
    const Image x = RandomImage(shape, rng);
    Region region = RandomRegion(9, 11, 0.3, rng);
    region.set(4, 4, false);
    const Rect a = LargestBackgroundRectangle(region);
    const Image tiled = InfillTile(x, region);
    for (int r = 0; r < shape.height; ++r) {
      for (int c = 0; c < shape.width; ++c) {
        for (int ch = 0; ch < 3; ++ch) {
          EXPECT_EQ(tiled.at(r, c, ch),
                    x.at(a.top + r % a.height, a.left + c % a.width, ch));
        }
      }
    }
  }
}

TEST(MixedRandBackgroundTest, KeepsForegroundAndTilesDonor) {
  Rng rng(2);
  const Shape shape{8, 8, 3};
  const Image x = RandomImage(shape, rng), donor = RandomImage(shape, rng);
  const Region region = Region::FromRect(8, 8, Rect{2, 2, 3, 3});
  const Region donor_region = Region::FromRect(8, 8, Rect{0, 0, 8, 4});
  const Image out = MixedRandBackground(x, region, donor, donor_region);
  const Image tiled = InfillTile(donor, donor_region);
  for (int r = 0; r < 8; ++r) {
    for (int c = 0; c < 8; ++c) {
      const auto want = region.at(r, c) ? x.pixel(r, c) : tiled.pixel(r, c);
      EXPECT_TRUE(
          std::equal(want.begin(), want.end(), out.pixel(r, c).begin()));
    }
  }
}

TEST(LoadExternalInfillTest, UsesFileInsideRegionOnly) {
  const auto dir = std::filesystem::temp_directory_path() / "cfaug_ext_test";
  std::filesystem::create_directories(dir);
  Rng rng(9);
  Image external = RandomImage(Shape{5, 5, 3}, rng);
  QuantizeTo8Bit(external);
  WritePngImage(dir / "a.png", external);
  const Image x = RandomImage(Shape{5, 5, 3}, rng);
  const Region region = Region::FromRect(5, 5, Rect{1, 1, 2, 2});
  EXPECT_EQ(LoadExternalInfill(dir / "a.png", x, region),
            ComposeCounterfactual(x, region, external));
  EXPECT_THROW(
      LoadExternalInfill(dir / "a.png", Image(Shape{4, 4, 3}), Region(4, 4)),
      InvalidArgument);
  EXPECT_THROW(LoadExternalInfill(dir / "missing.png", x, region), IoError);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace cfaug
