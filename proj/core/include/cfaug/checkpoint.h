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

#ifndef CFAUG_CHECKPOINT_H_
#define CFAUG_CHECKPOINT_H_

#include <filesystem>

#include "cfaug/network.h"

namespace cfaug::nn {

// Checkpoint layout (see docs/checkpoint_format.md):
//
//   cfaug-checkpoint 1
//   spec <in_channels> <height> <width> <num_classes> <conv1> <conv2> <pool>
//   tensors <count>
//   <name> <rank> <dim0> <dim1> ...      (one line per tensor)
//   data
//   <float32 little-endian values of every tensor, in manifest order>
void SaveCheckpoint(const std::filesystem::path& path,
                    const Network<float>& net);
Network<float> LoadCheckpoint(const std::filesystem::path& path);

}  // namespace cfaug::nn

#endif  // CFAUG_CHECKPOINT_H_
