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

#ifndef CFAUG_PNG_IO_H_
#define CFAUG_PNG_IO_H_

#include <filesystem>

#include "cfaug/image.h"

namespace cfaug {

// 8-bit PNG (grayscale or RGB; palette, alpha and 16-bit inputs are converted)
// mapped to [0,1] by v / 255.
Image ReadPngImage(const std::filesystem::path& path);

// Single-channel mask; any nonzero sample marks foreground.
Region ReadPngMask(const std::filesystem::path& path);

// Values are rounded to the nearest of the 256 levels.
void WritePngImage(const std::filesystem::path& path, const Image& image);
void WritePngMask(const std::filesystem::path& path, const Region& region);

// Rounds every value to the 8-bit grid, so that a write/read cycle is
// lossless.
void QuantizeTo8Bit(Image& image);

}  // namespace cfaug

#endif  // CFAUG_PNG_IO_H_
