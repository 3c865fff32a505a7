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

#include "cfaug/image.h"

#include <algorithm>
#include <cmath>
#include <utility>

namespace cfaug {

std::string ToString(const Shape& shape) {
  return std::to_string(shape.height) + "x" + std::to_string(shape.width) +
         "x" + std::to_string(shape.channels);
}

Image::Image(Shape shape, float fill) : shape_(shape) {
  if (!shape.valid()) {
    throw InvalidArgument("invalid image shape " + ToString(shape));
  }
  data_.assign(shape.size(), fill);
}

Image::Image(Shape shape, std::vector<float> data)
    : shape_(shape), data_(std::move(data)) {
  if (!shape.valid()) {
    throw InvalidArgument("invalid image shape " + ToString(shape));
  }
  if (data_.size() != shape.size()) {
    throw InvalidArgument("image data length " + std::to_string(data_.size()) +
                          " does not match shape " + ToString(shape));
  }
}

bool Image::InRange() const {
  return std::all_of(data_.begin(), data_.end(), [](float v) {
    return std::isfinite(v) && v >= 0.0f && v <= 1.0f;
  });
}

Region::Region(int height, int width, std::uint8_t fill)
    : height_(height), width_(width) {
  if (height <= 0 || width <= 0) {
    throw InvalidArgument("invalid region size");
  }
  mask_.assign(pixels(), fill ? 1 : 0);
}

Region::Region(int height, int width, std::vector<std::uint8_t> mask)
    : height_(height), width_(width), mask_(std::move(mask)) {
  if (height <= 0 || width <= 0 || mask_.size() != pixels()) {
    throw InvalidArgument("region mask length does not match its size");
  }
  for (auto& m : mask_) m = m ? 1 : 0;
}

Region Region::FromRect(int height, int width, const Rect& rect) {
  Region region(height, width);
  for (int r = rect.top; r < rect.top + rect.height; ++r) {
    for (int c = rect.left; c < rect.left + rect.width; ++c) {
      region.set(r, c, true);
    }
  }
  return region;
}

std::size_t Region::CountForeground() const {
  return static_cast<std::size_t>(
      std::count(mask_.begin(), mask_.end(), std::uint8_t{1}));
}

Rect Region::BoundingBox() const {
  int top = height_, left = width_, bottom = -1, right = -1;
  for (int r = 0; r < height_; ++r) {
    for (int c = 0; c < width_; ++c) {
      if (!at(r, c)) continue;
      top = std::min(top, r);
      bottom = std::max(bottom, r);
      left = std::min(left, c);
      right = std::max(right, c);
    }
  }
  if (bottom < 0) throw InvalidArgument("bounding box of an empty region");
  return {top, left, bottom - top + 1, right - left + 1};
}

Region Region::BoundingBoxRegion() const {
  if (CountForeground() == 0) return *this;
  return FromRect(height_, width_, BoundingBox());
}

Region Region::Complement() const {
  Region out = *this;
  for (auto& m : out.mask_) m = m ? 0 : 1;
  return out;
}

void CheckSameShape(const Image& image, const Region& region) {
  if (!region.Matches(image.shape())) {
    throw InvalidArgument("region " + std::to_string(region.height()) + "x" +
                          std::to_string(region.width()) +
                          " does not match image " + ToString(image.shape()));
  }
}

void CheckSameShape(const Image& a, const Image& b) {
  if (a.shape() != b.shape()) {
    throw InvalidArgument("image shape " + ToString(a.shape()) +
                          " does not match " + ToString(b.shape()));
  }
}

}  // namespace cfaug
