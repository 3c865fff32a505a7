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

// Command line front end: synth, augment, train, sweep and report.

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cfaug/config.h"
#include "cfaug/dataset_io.h"
#include "cfaug/experiment.h"

namespace {

using cfaug::ExperimentConfig;

// Every config key becomes --<key>; values given on the command line override
// those of --config.
struct ConfigFlags {
  std::string config_path;
  std::map<std::string, std::string> overrides;

  void Register(CLI::App* app) {
    app->add_option("--config", config_path, "Experiment config (JSON)")
        ->check(CLI::ExistingFile);
    for (const std::string& key : cfaug::ConfigKeys()) {
      app->add_option("--" + key, overrides[key],
                      "Override config field '" + key + "'")
          ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast)
          ->allow_extra_args(false);
    }
  }

  ExperimentConfig Resolve(CLI::App* app) const {
    ExperimentConfig config;
    if (!config_path.empty()) config = cfaug::LoadConfig(config_path);
    for (const auto& [key, value] : overrides) {
      if (app->count("--" + key) > 0) cfaug::SetConfigField(config, key, value);
    }
    config.Validate();
    return config;
  }
};

void PrintLine(const std::string& line) { std::cout << line << std::endl; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Counterfactual and factual data augmentation experiments"};
  app.require_subcommand(1);

  auto* synth = app.add_subcommand("synth", "Write a synthetic dataset");
  ConfigFlags synth_flags;
  synth_flags.Register(synth);
  std::string synth_out;
  synth->add_option("--out", synth_out, "Dataset directory")->required();

  auto* augment =
      app.add_subcommand("augment", "Generate augmented images offline");
  std::string aug_dataset, aug_out;
  cfaug::AugmentOptions aug;
  augment->add_option("--dataset", aug_dataset, "Source dataset directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  augment->add_option("--out", aug_out, "Output directory")->required();
  augment
      ->add_option("--recipe", aug.recipes,
                   "cf-{grey,random,shuffle,tile,external} or "
                   "f-{random,shuffle,mixed-rand,fgsm}; repeatable")
      ->required();
  augment->add_option("--seed", aug.seed, "Random seed");
  augment->add_option("--cf_use_bbox", aug.cf_use_bbox,
                      "Counterfactual region is the mask bounding box");
  augment->add_option("--f_use_bbox", aug.f_use_bbox,
                      "Factual region is the mask bounding box");
  augment->add_option("--external_infill_dir", aug.external_infill_dir,
                      "Directory of <id>.png inpaintings for cf-external");
  augment->add_option("--checkpoint", aug.checkpoint,
                      "Model checkpoint for f-fgsm");
  augment->add_option("--fgsm_epsilon", aug.fgsm_epsilon,
                      "FGSM budget in normalized units");

  auto* train = app.add_subcommand("train", "Train and evaluate every seed");
  ConfigFlags train_flags;
  train_flags.Register(train);

  auto* sweep = app.add_subcommand("sweep", "Grid sweep over one axis");
  ConfigFlags sweep_flags;
  sweep_flags.Register(sweep);
  std::string axis;
  std::vector<std::string> values;
  sweep
      ->add_option("--axis", axis,
                   "lambda_sal, fgsm_eps, data_ratio, cf_method or f_method")
      ->required();
  sweep->add_option("--values", values, "Axis values")
      ->required()
      ->delimiter(',');

  auto* report = app.add_subcommand("report", "Summarize metrics.csv files");
  std::string run_dir, baseline = "baseline";
  report->add_option("--run_dir", run_dir, "Directory holding runs")
      ->required()
      ->check(CLI::ExistingDirectory);
  report->add_option("--baseline", baseline, "Model name of the baseline");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      ExperimentConfig config = synth_flags.Resolve(synth);
      cfaug::WriteDatasetDir(synth_out, cfaug::GenerateSynthetic(config));
      PrintLine("wrote " + synth_out);
    } else if (augment->parsed()) {
      const auto summary = cfaug::AugmentOffline(aug_dataset, aug_out, aug);
      PrintLine("wrote " + std::to_string(summary.manifest.rows.size()) +
                " images, " + std::to_string(summary.errors.rows.size()) +
                " errors");
      for (const auto& row : summary.errors.rows) {
        std::cerr << "error: " << row[0] << " (" << row[1] << "): " << row[2]
                  << "\n";
      }
      return summary.errors.rows.empty() ? 0 : 2;
    } else if (train->parsed()) {
      ExperimentConfig config = train_flags.Resolve(train);
      const auto records = cfaug::RunExperiment(config, PrintLine);
      bool ok = true;
      for (const auto& r : records) ok = ok && r.status == "ok";
      PrintLine("metrics: " + config.output_dir + "/metrics.csv");
      return ok ? 0 : 3;
    } else if (sweep->parsed()) {
      ExperimentConfig config = sweep_flags.Resolve(sweep);
      cfaug::Sweep(config, cfaug::ParseSweepAxis(axis), values, PrintLine);
      PrintLine("sweep: " + config.output_dir + "/sweep.csv");
    } else if (report->parsed()) {
      const auto result = cfaug::WriteReport(run_dir, baseline);
      std::cout << result.markdown;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
