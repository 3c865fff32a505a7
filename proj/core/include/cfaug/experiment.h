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

#ifndef CFAUG_EXPERIMENT_H_
#define CFAUG_EXPERIMENT_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "cfaug/config.h"
#include "cfaug/csv.h"
#include "cfaug/dataset_io.h"
#include "cfaug/evalkit.h"
#include "cfaug/trainer.h"

namespace cfaug {

struct PreparedData {
  std::vector<synth::LabeledExample> train;
  std::vector<synth::LabeledExample> val;
  // Evaluation splits by name. "original" holds the test examples whose
  // background matches the label; the mixed splits are built from it in the
  // same order, so original and mixed_next are paired.
  std::map<std::string, std::vector<synth::LabeledExample>> test;
};

// Full synthetic train/val/test sets of `config` (before data-ratio
// subsampling and split construction); test is the pool generated with
// test_correlation.
SplitDataset GenerateSynthetic(const ExperimentConfig& config);

// Synthetic generation (or directory loading), data-ratio subsampling and
// evaluation split construction. Only the splits named in config.splits are
// kept, plus "original" whenever mixed_next is requested.
PreparedData PrepareData(const ExperimentConfig& config);

// The first floor(N * ratio) examples of a per-class round robin over
// `examples` (stable within each class), so every class contributes equally
// up to rounding. Requires 0 < ratio <= 1.
std::vector<synth::LabeledExample> SubsampleBalanced(
    const std::vector<synth::LabeledExample>& examples, double ratio,
    int num_classes);

struct RunRecord {
  std::string config_hash;
  std::string model;
  std::uint64_t seed = 0;
  std::vector<std::string> loss_terms;  // active loss components
  std::vector<EpochLog> epochs;
  int best_epoch = 0;
  int last_epoch = 0;
  double best_val_accuracy = 0.0;
  int rejected_steps = 0;
  int train_size = 0;
  std::string status = "ok";
  std::string diagnostic;
  std::vector<eval::MetricReport> reports;
  double wall_seconds = 0.0;  // written only to the timing sidecar
};

// JSON text of a record without its wall time.
std::string RunRecordToJson(const RunRecord& record);

using LogFn = std::function<void(const std::string&)>;

// Trains and evaluates one model per seed. Writes, under output_dir:
//   config.json, metrics.csv, seed_<s>/record.json, seed_<s>/model.ckpt
// and appends wall times to timing.log. Every file but timing.log is a
// deterministic function of the config.
std::vector<RunRecord> RunExperiment(const ExperimentConfig& config,
                                     const LogFn& log = {});

enum class SweepAxis { kLambdaSal, kFgsmEps, kDataRatio, kCfMethod, kFMethod };

SweepAxis ParseSweepAxis(const std::string& name);
std::string ToString(SweepAxis axis);

// Copy of `base` with the axis set to `value` (enabling the matching loss
// term) and output_dir moved to <base.output_dir>/<axis>=<value>.
ExperimentConfig ApplySweepValue(const ExperimentConfig& base, SweepAxis axis,
                                 const std::string& value);

struct SweepResult {
  CsvTable table;    // axis,value,model,seed,split,<metrics>
  CsvTable scatter;  // axis,value,seed,split,saliency_aupr,accuracy
  CsvTable summary;  // split,points,r_squared
};

// Runs RunExperiment per value and writes sweep.csv, scatter.csv and
// r_squared.csv into base.output_dir.
SweepResult Sweep(const ExperimentConfig& base, SweepAxis axis,
                  const std::vector<std::string>& values,
                  const LogFn& log = {});

struct Report {
  std::string markdown;
  CsvTable table;  // model,split,metric,n,mean,std,rel_improvement
};

// Mean and sample standard deviation (0 for one seed) per model, split and
// metric; rel_improvement = 100 * (acc - acc_baseline) / acc_baseline for
// accuracy rows when the baseline model is present.
Report BuildReport(const std::vector<eval::MetricRow>& rows,
                   const std::string& baseline_model = "baseline");

// Collects every metrics.csv below run_dir, writes report.md and report.csv
// into run_dir and returns the report. Throws when no record is found.
Report WriteReport(const std::filesystem::path& run_dir,
                   const std::string& baseline_model = "baseline");

struct AugmentOptions {
  std::vector<std::string> recipes;  // e.g. "cf-grey", "f-shuffle"
  std::uint64_t seed = 0;
  bool cf_use_bbox = true;
  bool f_use_bbox = false;
  std::string external_infill_dir;
  std::string checkpoint;  // required by f-fgsm
  double fgsm_epsilon = 0.5;
};

struct AugmentSummary {
  CsvTable manifest;  // source_id,method,output_path,label_action
  CsvTable errors;    // source_id,method,error
};

// Writes augmented PNGs to out_dir/images plus manifest.csv and errors.csv.
// Unreadable or inconsistent inputs are recorded in errors.csv and skipped.
AugmentSummary AugmentOffline(const std::filesystem::path& dataset_dir,
                              const std::filesystem::path& out_dir,
                              const AugmentOptions& options);

}  // namespace cfaug

#endif  // CFAUG_EXPERIMENT_H_
