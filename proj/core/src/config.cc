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

#include "cfaug/config.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace cfaug {
namespace {

using Json = nlohmann::json;

// clang-format off
#define CFAUG_CONFIG_FIELDS(X)                                          \
  X(dataset_dir) X(num_classes) X(image_size) X(train_per_class)        \
  X(val_per_class) X(test_per_class) X(correlation) X(val_correlation)  \
  X(test_correlation) X(background_noise) X(position_jitter)            \
  X(data_seed) X(data_ratio) X(cf_enabled) X(cf_infill) X(cf_variant)   \
  X(cf_use_bbox) X(f_enabled) X(f_infill) X(f_use_bbox)                 \
  X(fgsm_epsilon) X(sal_enabled) X(lambda_sal) X(mixup_alpha)           \
  X(label_smoothing) X(external_infill_dir) X(conv1) X(conv2)           \
  X(global_pool) X(epochs) X(batch_size) X(lr) X(momentum)              \
  X(weight_decay) X(lr_decay_epochs) X(lr_decay_factor) X(patience)     \
  X(seeds) X(splits) X(model_name) X(output_dir)
// clang-format on

Json ToJson(const ExperimentConfig& c) {
  Json j = Json::object();
#define CFAUG_TO_JSON(name) j[#name] = c.name;
  CFAUG_CONFIG_FIELDS(CFAUG_TO_JSON)
#undef CFAUG_TO_JSON
  return j;
}

// Integer fields reject fractional JSON numbers; nlohmann would truncate.
template <typename V>
void ReadField(const Json& value, const std::string& key, V* out) {
  const Json defaults = *out;
  const bool type_ok =
      (defaults.is_boolean() && value.is_boolean()) ||
      (defaults.is_number_unsigned() && value.is_number_unsigned()) ||
      (defaults.is_number_integer() && !defaults.is_number_unsigned() &&
       value.is_number_integer()) ||
      (defaults.is_number_float() && value.is_number()) ||
      (defaults.is_string() && value.is_string()) ||
      (defaults.is_array() && value.is_array());
  if (!type_ok) {
    throw InvalidArgument("config key '" + key + "' has the wrong type");
  }
  try {
    *out = value.get<V>();
  } catch (const Json::exception& e) {
    throw InvalidArgument("config key '" + key + "': " + e.what());
  }
}

void FromJson(const Json& j, ExperimentConfig& c) {
  if (!j.is_object()) throw InvalidArgument("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
#define CFAUG_FROM_JSON(name)       \
  if (key == #name) {               \
    ReadField(value, key, &c.name); \
    known = true;                   \
  }
    CFAUG_CONFIG_FIELDS(CFAUG_FROM_JSON)
#undef CFAUG_FROM_JSON
    if (!known) throw InvalidArgument("unknown config key '" + key + "'");
  }
}

std::vector<std::string> SplitComma(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

Json ParseScalar(const Json& like, const std::string& key,
                 const std::string& text) {
  auto fail = [&] {
    return InvalidArgument("bad value '" + text + "' for config key '" + key +
                           "'");
  };
  if (like.is_string()) return text;
  if (like.is_boolean()) {
    if (text == "true" || text == "1") return true;
    if (text == "false" || text == "0") return false;
    throw fail();
  }
  try {
    std::size_t used = 0;
    if (like.is_number_unsigned()) {
      if (!text.empty() && text[0] == '-') throw fail();
      const unsigned long long v = std::stoull(text, &used);
      if (used != text.size()) throw fail();
      return v;
    }
    if (like.is_number_integer()) {
      const long long v = std::stoll(text, &used);
      if (used != text.size()) throw fail();
      return v;
    }
    const double v = std::stod(text, &used);
    if (used != text.size()) throw fail();
    return v;
  } catch (const std::logic_error&) {
    throw fail();
  }
}

}  // namespace

void ExperimentConfig::Validate() const {
  if (dataset_dir.empty()) {
    synth::SynthSpec spec;
    spec.num_classes = num_classes;
    spec.image_size = image_size;
    spec.samples_per_class = train_per_class;
    spec.correlation = correlation;
    spec.background_noise = background_noise;
    spec.position_jitter = position_jitter;
    spec.Validate();
    if (val_per_class < 1 || test_per_class < 1) {
      throw InvalidArgument("val_per_class and test_per_class must be >= 1");
    }
    if (val_correlation > 1.0) {
      throw InvalidArgument("val_correlation must be <= 1");
    }
    if (!(test_correlation >= 0.0 && test_correlation <= 1.0)) {
      throw InvalidArgument("test_correlation must be in [0, 1]");
    }
  } else if (data_ratio > 1.0) {
    throw InvalidArgument(
        "data_ratio > 1 is only supported for synthetic data");
  }
  if (!(data_ratio > 0.0)) throw InvalidArgument("data_ratio must be > 0");
  Loss().Validate();
  if (epochs < 1) throw InvalidArgument("epochs must be >= 1");
  if (batch_size < 1) throw InvalidArgument("batch_size must be >= 1");
  if (mixup_alpha > 0.0 && batch_size < 2) {
    throw InvalidArgument("mixup needs batch_size >= 2");
  }
  if (!(lr > 0.0)) throw InvalidArgument("lr must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    throw InvalidArgument("momentum must be in [0, 1)");
  }
  if (!(weight_decay >= 0.0))
    throw InvalidArgument("weight_decay must be >= 0");
  if (!(lr_decay_factor > 0.0)) {
    throw InvalidArgument("lr_decay_factor must be > 0");
  }
  if (patience < 0) throw InvalidArgument("patience must be >= 0");
  if (conv1 < 1 || conv2 < 1) throw InvalidArgument("conv widths must be >= 1");
  if (seeds.empty()) throw InvalidArgument("at least one seed is required");
  for (const auto& split : splits) synth::ParseSplitMode(split);
  if (output_dir.empty()) throw InvalidArgument("output_dir must be set");
}

loss::LossConfig ExperimentConfig::Loss() const {
  loss::LossConfig c;
  c.cf_enabled = cf_enabled;
  c.cf_infill = ParseCfInfill(cf_infill);
  c.cf_variant = loss::ParseCfVariant(cf_variant);
  c.cf_use_bbox = cf_use_bbox;
  c.f_enabled = f_enabled;
  c.f_infill = ParseFInfill(f_infill);
  c.f_use_bbox = f_use_bbox;
  c.fgsm_epsilon = fgsm_epsilon;
  c.sal_enabled = sal_enabled;
  c.lambda_sal = lambda_sal;
  c.mixup_alpha = mixup_alpha;
  c.label_smoothing = label_smoothing;
  c.external_infill_dir = external_infill_dir;
  return c;
}

nn::NetworkSpec ExperimentConfig::Network() const {
  nn::NetworkSpec spec;
  spec.in_channels = 3;
  spec.height = image_size;
  spec.width = image_size;
  spec.num_classes = num_classes;
  spec.conv1 = conv1;
  spec.conv2 = conv2;
  spec.global_pool = global_pool;
  return spec;
}

nn::SgdOptions ExperimentConfig::Sgd(int epoch) const {
  nn::SgdOptions options;
  options.lr = lr;
  for (int e : lr_decay_epochs) {
    if (epoch > e) options.lr *= lr_decay_factor;
  }
  options.momentum = momentum;
  options.weight_decay = weight_decay;
  return options;
}

std::string ExperimentConfig::ModelName() const {
  if (!model_name.empty()) return model_name;
  std::vector<std::string> parts;
  if (cf_enabled) parts.push_back("cf-" + cf_infill);
  if (f_enabled) parts.push_back("f-" + f_infill);
  if (sal_enabled) parts.push_back("sal");
  if (mixup_alpha > 0.0) parts.push_back("mixup");
  if (label_smoothing > 0.0) parts.push_back("ls");
  if (parts.empty()) return "baseline";
  std::string name = parts[0];
  for (std::size_t i = 1; i < parts.size(); ++i) name += "+" + parts[i];
  return name;
}

std::string ConfigToJson(const ExperimentConfig& config) {
  return ToJson(config).dump(2) + "\n";
}

ExperimentConfig ConfigFromJson(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw InvalidArgument(std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig config;
  FromJson(j, config);
  return config;
}

ExperimentConfig LoadConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ConfigFromJson(buffer.str());
}

void SaveConfig(const std::filesystem::path& path,
                const ExperimentConfig& config) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path);
  out << ConfigToJson(config);
  if (!out) throw IoError("cannot write config " + path.string());
}

std::vector<std::string> ConfigKeys() {
  std::vector<std::string> keys;
  const Json j = ToJson(ExperimentConfig{});
  for (const auto& [key, value] : j.items()) keys.push_back(key);
  return keys;
}

void SetConfigField(ExperimentConfig& config, const std::string& key,
                    const std::string& value) {
  Json j = ToJson(config);
  auto it = j.find(key);
  if (it == j.end()) throw InvalidArgument("unknown config key '" + key + "'");
  if (it->is_array()) {
    const Json like = ToJson(ExperimentConfig{})[key].at(0);
    Json items = Json::array();
    for (const auto& item : SplitComma(value)) {
      items.push_back(ParseScalar(like, key, item));
    }
    *it = items;
  } else {
    *it = ParseScalar(*it, key, value);
  }
  FromJson(j, config);
}

std::string ConfigHash(const ExperimentConfig& config) {
  Json j = ToJson(config);
  j.erase("output_dir");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : j.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(h));
  return hex;
}

}  // namespace cfaug
