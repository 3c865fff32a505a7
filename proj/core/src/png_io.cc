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

#include "cfaug/png_io.h"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

namespace cfaug {
namespace {

struct Decoded {
  int height = 0;
  int width = 0;
  int channels = 0;  // 1 or 3
  std::vector<std::uint8_t> samples;
};

Decoded Decode(const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw IoError("cannot decode " + path.string() + ": " + image.message);
  }
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  Decoded out;
  out.height = static_cast<int>(image.height);
  out.width = static_cast<int>(image.width);
  out.channels = color ? 3 : 1;
  out.samples.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, out.samples.data(), 0, nullptr)) {
    const std::string message = image.message;
    png_image_free(&image);
    throw IoError("cannot decode " + path.string() + ": " + message);
  }
  return out;
}

void Encode(const std::filesystem::path& path, int height, int width,
            int channels, const std::vector<std::uint8_t>& samples) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.c_str(), 0, samples.data(), 0,
                               nullptr)) {
    throw IoError("cannot write " + path.string() + ": " + image.message);
  }
}

std::uint8_t ToByte(float v) {
  return static_cast<std::uint8_t>(
      std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
}

}  // namespace

Image ReadPngImage(const std::filesystem::path& path) {
  Decoded d = Decode(path);
  std::vector<float> data(d.samples.size());
  std::transform(d.samples.begin(), d.samples.end(), data.begin(),
                 [](std::uint8_t v) { return v / 255.0f; });
  return Image({d.height, d.width, d.channels}, std::move(data));
}

Region ReadPngMask(const std::filesystem::path& path) {
  Decoded d = Decode(path);
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(d.height) * d.width);
  for (std::size_t p = 0; p < mask.size(); ++p) {
    std::uint8_t any = 0;
    for (int c = 0; c < d.channels; ++c) any |= d.samples[p * d.channels + c];
    mask[p] = any ? 1 : 0;
  }
  return Region(d.height, d.width, std::move(mask));
}

void WritePngImage(const std::filesystem::path& path, const Image& image) {
  std::vector<std::uint8_t> samples(image.data().size());
  std::transform(image.data().begin(), image.data().end(), samples.begin(),
                 ToByte);
  Encode(path, image.height(), image.width(), image.channels(), samples);
}

void WritePngMask(const std::filesystem::path& path, const Region& region) {
  std::vector<std::uint8_t> samples(region.pixels());
  std::transform(region.mask().begin(), region.mask().end(), samples.begin(),
                 [](std::uint8_t m) -> std::uint8_t { return m ? 255 : 0; });
  Encode(path, region.height(), region.width(), 1, samples);
}

void QuantizeTo8Bit(Image& image) {
  for (auto& v : image.data()) v = ToByte(v) / 255.0f;
}

}  // namespace cfaug
