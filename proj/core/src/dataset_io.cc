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

#include "cfaug/dataset_io.h"

#include "cfaug/csv.h"
#include "cfaug/png_io.h"

namespace cfaug {

namespace fs = std::filesystem;

void WriteDatasetDir(const fs::path& dir, const SplitDataset& dataset) {
  fs::create_directories(dir / "images");
  fs::create_directories(dir / "masks");
  CsvTable labels;
  labels.header = {"id", "label", "background_class", "split"};
  auto emit = [&](const std::vector<synth::LabeledExample>& part,
                  const char* split) {
    for (const auto& ex : part) {
      WritePngImage(dir / "images" / (ex.id + ".png"), ex.image);
      WritePngMask(dir / "masks" / (ex.id + ".png"), ex.region);
      labels.AddRow({ex.id, std::to_string(ex.label),
                     std::to_string(ex.background_class), split});
    }
  };
  emit(dataset.train, "train");
  emit(dataset.val, "val");
  emit(dataset.test, "test");
  WriteCsv(dir / "labels.csv", labels);
}

std::vector<DatasetEntry> ReadLabels(const fs::path& dir) {
  const CsvTable labels = ReadCsv(dir / "labels.csv");
  const std::size_t id_col = labels.Column("id");
  const std::size_t label_col = labels.Column("label");
  const std::size_t bg_col = labels.Column("background_class");
  const std::size_t split_col = labels.Column("split");
  std::vector<DatasetEntry> out;
  for (const auto& row : labels.rows) {
    DatasetEntry entry;
    entry.id = row[id_col];
    try {
      entry.label = std::stoi(row[label_col]);
      entry.background_class = std::stoi(row[bg_col]);
    } catch (const std::exception&) {
      throw IoError("labels.csv: malformed row for id '" + entry.id + "'");
    }
    entry.split = row[split_col];
    if (entry.split != "train" && entry.split != "val" &&
        entry.split != "test") {
      throw IoError("labels.csv: unknown split '" + entry.split + "'");
    }
    out.push_back(std::move(entry));
  }
  return out;
}

synth::LabeledExample LoadExample(const fs::path& dir,
                                  const DatasetEntry& entry) {
  synth::LabeledExample ex;
  ex.id = entry.id;
  ex.label = entry.label;
  ex.background_class = entry.background_class;
  ex.image = ReadPngImage(dir / "images" / (ex.id + ".png"));
  ex.region = ReadPngMask(dir / "masks" / (ex.id + ".png"));
  if (!ex.region.Matches(ex.image.shape())) {
    throw IoError("mask/image shape mismatch for id '" + ex.id + "'");
  }
  return ex;
}

SplitDataset ReadDatasetDir(const fs::path& dir) {
  SplitDataset out;
  for (const DatasetEntry& entry : ReadLabels(dir)) {
    synth::LabeledExample ex = LoadExample(dir, entry);
    if (entry.split == "train") {
      out.train.push_back(std::move(ex));
    } else if (entry.split == "val") {
      out.val.push_back(std::move(ex));
    } else {
      out.test.push_back(std::move(ex));
    }
  }
  return out;
}

}  // namespace cfaug
