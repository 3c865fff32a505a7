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

#ifndef CFAUG_IMAGE_H_
#define CFAUG_IMAGE_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cfaug {

// Raised for inputs that violate an operation's preconditions (shape
// mismatches, empty regions, out-of-range parameters).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised for file-system and decode failures.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Shape {
  int height = 0;
  int width = 0;
  int channels = 0;

  std::size_t pixels() const {
    return static_cast<std::size_t>(height) * width;
  }
  std::size_t size() const { return pixels() * channels; }
  bool valid() const {
    return height > 0 && width > 0 && (channels == 1 || channels == 3);
  }
  friend bool operator==(const Shape&, const Shape&) = default;
};

std::string ToString(const Shape& shape);

// H x W x C pixel grid, row-major with interleaved channels. Values live in
// [0, 1]; the model boundary maps them to [-1, 1] (see Normalize).
class Image {
 public:
  Image() = default;
  explicit Image(Shape shape, float fill = 0.0f);
  Image(Shape shape, std::vector<float> data);

  const Shape& shape() const { return shape_; }
  int height() const { return shape_.height; }
  int width() const { return shape_.width; }
  int channels() const { return shape_.channels; }
  bool empty() const { return data_.empty(); }

  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }

  float& at(int row, int col, int channel) {
    return data_[Offset(row, col, channel)];
  }
  float at(int row, int col, int channel) const {
    return data_[Offset(row, col, channel)];
  }
  // Channel vector of one pixel.
  std::span<float> pixel(int row, int col) {
    return {data_.data() + Offset(row, col, 0),
            static_cast<std::size_t>(shape_.channels)};
  }
  std::span<const float> pixel(int row, int col) const {
    return {data_.data() + Offset(row, col, 0),
            static_cast<std::size_t>(shape_.channels)};
  }

  // True iff every value is finite and inside [0, 1].
  bool InRange() const;

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t Offset(int row, int col, int channel) const {
    return (static_cast<std::size_t>(row) * shape_.width + col) *
               shape_.channels +
           channel;
  }

  Shape shape_;
  std::vector<float> data_;
};

// Infill values share the Image representation.
using InfillSample = Image;

// Axis-aligned rectangle in pixel coordinates.
struct Rect {
  int top = 0;
  int left = 0;
  int height = 0;
  int width = 0;

  long area() const { return static_cast<long>(height) * width; }
  bool Contains(int row, int col) const {
    return row >= top && row < top + height && col >= left &&
           col < left + width;
  }
  friend bool operator==(const Rect&, const Rect&) = default;
};

// Binary causal mask: 1 marks foreground (causal) pixels.
class Region {
 public:
  Region() = default;
  Region(int height, int width, std::uint8_t fill = 0);
  Region(int height, int width, std::vector<std::uint8_t> mask);

  static Region FromRect(int height, int width, const Rect& rect);

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t pixels() const {
    return static_cast<std::size_t>(height_) * width_;
  }

  bool at(int row, int col) const {
    return mask_[static_cast<std::size_t>(row) * width_ + col] != 0;
  }
  void set(int row, int col, bool value) {
    mask_[static_cast<std::size_t>(row) * width_ + col] = value ? 1 : 0;
  }
  std::span<const std::uint8_t> mask() const { return mask_; }

  std::size_t CountForeground() const;
  std::size_t CountBackground() const { return pixels() - CountForeground(); }

  // Tightest rectangle containing every foreground pixel. Throws
  // InvalidArgument if the region has no foreground.
  Rect BoundingBox() const;
  // The bounding box rendered as a region; empty regions map to themselves.
  Region BoundingBoxRegion() const;
  Region Complement() const;

  bool Matches(const Shape& shape) const {
    return shape.height == height_ && shape.width == width_;
  }

  friend bool operator==(const Region&, const Region&) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<std::uint8_t> mask_;
};

// [0,1] -> [-1,1] and back. Grey (0.5) maps to exactly 0.
inline float Normalize(float v) { return 2.0f * v - 1.0f; }
inline float Denormalize(float v) { return 0.5f * (v + 1.0f); }

void CheckSameShape(const Image& image, const Region& region);
void CheckSameShape(const Image& a, const Image& b);

}  // namespace cfaug

#endif  // CFAUG_IMAGE_H_
