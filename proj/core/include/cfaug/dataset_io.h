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

#ifndef CFAUG_DATASET_IO_H_
#define CFAUG_DATASET_IO_H_

#include <filesystem>
#include <string>
#include <vector>

#include "cfaug/synthbench.h"

namespace cfaug {

struct SplitDataset {
  std::vector<synth::LabeledExample> train;
  std::vector<synth::LabeledExample> val;
  std::vector<synth::LabeledExample> test;
};

// Directory layout:
//   images/<id>.png   8-bit RGB or grayscale
//   masks/<id>.png    single channel, nonzero = foreground
//   labels.csv        id,label,background_class,split  (split: train|val|test)
void WriteDatasetDir(const std::filesystem::path& dir,
                     const SplitDataset& dataset);
SplitDataset ReadDatasetDir(const std::filesystem::path& dir);

// One labels.csv row.
struct DatasetEntry {
  std::string id;
  int label = 0;
  int background_class = 0;
  std::string split;
};

std::vector<DatasetEntry> ReadLabels(const std::filesystem::path& dir);

// Loads the image and mask of one entry. Throws IoError on unreadable files
// or a mask/image shape mismatch.
synth::LabeledExample LoadExample(const std::filesystem::path& dir,
                                  const DatasetEntry& entry);

}  // namespace cfaug

#endif  // CFAUG_DATASET_IO_H_
