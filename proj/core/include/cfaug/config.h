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

#ifndef CFAUG_CONFIG_H_
#define CFAUG_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cfaug/network.h"
#include "cfaug/objectives.h"
#include "cfaug/synthbench.h"

namespace cfaug {

// One experiment. Serialized as a flat JSON object whose keys are the field
// names below (see docs/config_schema.md); arrays are the only non-scalar
// values.
struct ExperimentConfig {
  // Dataset: a directory in the dataset format, or synthetic when empty.
  std::string dataset_dir;
  int num_classes = 5;
  int image_size = 32;
  int train_per_class = 1000;
  int val_per_class = 200;
  int test_per_class = 500;
  double correlation = 0.95;      // train split
  double val_correlation = -1.0;  // < 0 means balanced, 1/K
  double test_correlation = 0.5;  // test pool before split construction
  double background_noise = 0.04;
  double position_jitter = 0.3;
  std::uint64_t data_seed = 0;
  // Fraction (or, for synthetic data, multiple) of the training set to use.
  double data_ratio = 1.0;

  // Loss terms.
  bool cf_enabled = false;
  std::string cf_infill = "grey";
  int cf_variant = 1;
  bool cf_use_bbox = true;
  bool f_enabled = false;
  std::string f_infill = "shuffle";
  bool f_use_bbox = false;
  double fgsm_epsilon = 0.5;
  bool sal_enabled = false;
  double lambda_sal = 0.0;
  double mixup_alpha = 0.0;
  double label_smoothing = 0.0;
  std::string external_infill_dir;

  // Network.
  int conv1 = 8;
  int conv2 = 16;
  bool global_pool = false;

  // Optimization.
  int epochs = 30;
  int batch_size = 64;
  double lr = 0.05;
  double momentum = 0.9;
  double weight_decay = 0.0;
  std::vector<int> lr_decay_epochs = {15, 25};
  double lr_decay_factor = 0.1;
  int patience = 0;  // epochs without improvement before stopping; 0 = never

  std::vector<std::uint64_t> seeds = {0, 1, 2};
  std::vector<std::string> splits = {"original", "flip", "mixed_same",
                                     "mixed_rand", "mixed_next"};
  std::string model_name;  // derived from the loss terms when empty
  std::string output_dir = "runs/experiment";

  // Throws InvalidArgument on an inconsistent config.
  void Validate() const;

  loss::LossConfig Loss() const;
  nn::NetworkSpec Network() const;
  nn::SgdOptions Sgd(int epoch) const;  // learning rate of 1-based `epoch`

  // `model_name`, or a name such as "cf-grey+f-shuffle" / "baseline".
  std::string ModelName() const;
};

// Canonical JSON text (sorted keys, 2-space indent).
std::string ConfigToJson(const ExperimentConfig& config);
// Unknown keys and type mismatches are errors; missing keys keep defaults.
ExperimentConfig ConfigFromJson(const std::string& text);
ExperimentConfig LoadConfig(const std::filesystem::path& path);
void SaveConfig(const std::filesystem::path& path,
                const ExperimentConfig& config);

// Every config key, in sorted order.
std::vector<std::string> ConfigKeys();

// Sets one field from command-line text. Booleans accept true/false/1/0,
// arrays accept comma-separated items.
void SetConfigField(ExperimentConfig& config, const std::string& key,
                    const std::string& value);

// 16 hex digits of FNV-1a over the canonical JSON without output_dir.
std::string ConfigHash(const ExperimentConfig& config);

}  // namespace cfaug

#endif  // CFAUG_CONFIG_H_
