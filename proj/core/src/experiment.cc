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

#include "cfaug/experiment.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "cfaug/checkpoint.h"
#include "cfaug/dataset_io.h"
#include "cfaug/png_io.h"
#include "json.hpp"

namespace cfaug {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::json;
using synth::LabeledExample;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

enum DataStream : std::uint64_t {
  kTrainData = 1,
  kValData = 2,
  kTestData = 3,
  kFlipSplit = 4,
  kMixedSplit = 5,
};

std::uint64_t Fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<LabeledExample> Generate(const ExperimentConfig& config,
                                     int per_class, double correlation,
                                     DataStream stream, const char* prefix) {
  synth::SynthSpec spec;
  spec.num_classes = config.num_classes;
  spec.image_size = config.image_size;
  spec.channels = 3;
  spec.samples_per_class = per_class;
  spec.correlation = correlation;
  spec.background_noise = config.background_noise;
  spec.position_jitter = config.position_jitter;
  spec.seed = DeriveSeed(config.data_seed, {stream});
  return synth::GenerateDataset(spec, prefix);
}

void CheckLoaded(const ExperimentConfig& config,
                 const std::vector<LabeledExample>& examples,
                 const char* split) {
  for (const auto& ex : examples) {
    if (ex.image.height() != config.image_size ||
        ex.image.width() != config.image_size || ex.image.channels() != 3) {
      throw InvalidArgument(std::string(split) + " example '" + ex.id +
                            "' is not " + std::to_string(config.image_size) +
                            "x" + std::to_string(config.image_size) + "x3");
    }
    if (ex.label < 0 || ex.label >= config.num_classes ||
        ex.background_class < 0 || ex.background_class >= config.num_classes) {
      throw InvalidArgument(std::string(split) + " example '" + ex.id +
                            "' has a class outside [0, num_classes)");
    }
  }
}

std::vector<std::string> ActiveTerms(const loss::LossConfig& c) {
  std::vector<std::string> terms = {"ce"};
  if (c.cf_enabled) terms.push_back("cf");
  if (c.f_enabled) terms.push_back("factual");
  if (c.sal_enabled && c.lambda_sal > 0.0) terms.push_back("sal");
  return terms;
}

Json NumberOrNull(double v) { return std::isfinite(v) ? Json(v) : Json(); }

Json ReportToJson(const eval::MetricReport& r) {
  Json j;
  j["split"] = r.split;
  j["accuracy"] = NumberOrNull(r.accuracy);
  j["macro_auc"] = NumberOrNull(r.macro_auc);
  j["saliency_aupr"] = NumberOrNull(r.saliency_aupr);
  j["next_class_shift"] = NumberOrNull(r.next_class_shift);
  j["aupr_skipped"] = r.aupr_skipped;
  Json acc = Json::array(), auc = Json::array();
  for (double v : r.per_class_accuracy) acc.push_back(NumberOrNull(v));
  for (double v : r.per_class_auc) auc.push_back(NumberOrNull(v));
  j["per_class_accuracy"] = acc;
  j["per_class_auc"] = auc;
  return j;
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw IoError("cannot write " + path.string());
}

double Mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / v.size();
}

double SampleStd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = Mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / (v.size() - 1));
}

std::string Percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", 100.0 * v);
  return buf;
}

}  // namespace

std::vector<LabeledExample> SubsampleBalanced(
    const std::vector<LabeledExample>& examples, double ratio,
    int num_classes) {
  if (!(ratio > 0.0 && ratio <= 1.0)) {
    throw InvalidArgument("subsample ratio must be in (0, 1]");
  }
  std::vector<std::vector<const LabeledExample*>> by_class(num_classes);
  for (const auto& ex : examples) {
    if (ex.label < 0 || ex.label >= num_classes) {
      throw InvalidArgument("label out of range in '" + ex.id + "'");
    }
    by_class[ex.label].push_back(&ex);
  }
  const auto target = static_cast<std::size_t>(
      std::floor(static_cast<double>(examples.size()) * ratio));
  std::vector<LabeledExample> out;
  out.reserve(target);
  for (std::size_t round = 0; out.size() < target; ++round) {
    for (int k = 0; k < num_classes && out.size() < target; ++k) {
      if (round < by_class[k].size()) out.push_back(*by_class[k][round]);
    }
  }
  return out;
}

SplitDataset GenerateSynthetic(const ExperimentConfig& config) {
  config.Validate();
  const int k = config.num_classes;
  const int per_class = static_cast<int>(
      std::ceil(config.train_per_class * std::max(1.0, config.data_ratio)));
  SplitDataset out;
  out.train =
      Generate(config, per_class, config.correlation, kTrainData, "train_");
  const double val_rho =
      config.val_correlation < 0.0 ? 1.0 / k : config.val_correlation;
  out.val = Generate(config, config.val_per_class, val_rho, kValData, "val_");
  out.test = Generate(config, config.test_per_class, config.test_correlation,
                      kTestData, "test_");
  return out;
}

PreparedData PrepareData(const ExperimentConfig& config) {
  config.Validate();
  const int k = config.num_classes;
  PreparedData data;
  std::vector<LabeledExample> test_pool;
  if (config.dataset_dir.empty()) {
    SplitDataset generated = GenerateSynthetic(config);
    if (config.data_ratio <= 1.0) {
      data.train = SubsampleBalanced(generated.train, config.data_ratio, k);
    } else {
      // Generation order is already a class round robin, and example i does
      // not depend on the dataset size, so the ratio-1 set is a prefix.
      generated.train.resize(static_cast<std::size_t>(
          std::floor(static_cast<double>(k) * config.train_per_class *
                     config.data_ratio)));
      data.train = std::move(generated.train);
    }
    data.val = std::move(generated.val);
    test_pool = std::move(generated.test);
  } else {
    SplitDataset loaded = ReadDatasetDir(config.dataset_dir);
    CheckLoaded(config, loaded.train, "train");
    CheckLoaded(config, loaded.val, "val");
    CheckLoaded(config, loaded.test, "test");
    data.train = SubsampleBalanced(loaded.train, config.data_ratio, k);
    data.val = std::move(loaded.val);
    test_pool = std::move(loaded.test);
  }
  if (data.train.empty()) throw InvalidArgument("training set is empty");
  if (data.val.empty()) throw InvalidArgument("validation set is empty");
  if (test_pool.empty()) throw InvalidArgument("test set is empty");

  std::set<std::string> wanted(config.splits.begin(), config.splits.end());
  if (wanted.count("mixed_next")) wanted.insert("original");
  Rng flip_rng(DeriveSeed(config.data_seed, {kFlipSplit}));
  synth::FlipSplit flip = synth::BuildFlipSplit(test_pool, flip_rng);
  for (const std::string& name : wanted) {
    const synth::SplitMode mode = synth::ParseSplitMode(name);
    switch (mode) {
      case synth::SplitMode::kOriginal:
        data.test[name] = flip.original;
        break;
      case synth::SplitMode::kFlip:
        data.test[name] = flip.flip;
        break;
      default: {
        Rng rng(DeriveSeed(config.data_seed,
                           {kMixedSplit, static_cast<std::uint64_t>(mode)}));
        data.test[name] = synth::BuildMixedSplit(flip.original, mode, k, rng);
      }
    }
  }
  return data;
}

std::string RunRecordToJson(const RunRecord& record) {
  Json j;
  j["config_hash"] = record.config_hash;
  j["model"] = record.model;
  j["seed"] = record.seed;
  j["loss_terms"] = record.loss_terms;
  j["best_epoch"] = record.best_epoch;
  j["last_epoch"] = record.last_epoch;
  j["best_val_accuracy"] = record.best_val_accuracy;
  j["rejected_steps"] = record.rejected_steps;
  j["train_size"] = record.train_size;
  j["status"] = record.status;
  j["diagnostic"] = record.diagnostic;
  Json epochs = Json::array();
  for (const EpochLog& e : record.epochs) {
    Json je;
    je["epoch"] = e.epoch;
    je["lr"] = e.lr;
    je["val_accuracy"] = e.val_accuracy;
    Json losses;
    for (const std::string& term : record.loss_terms) {
      if (term == "ce") losses["ce"] = NumberOrNull(e.losses.ce);
      if (term == "cf") losses["cf"] = NumberOrNull(e.losses.cf);
      if (term == "factual") losses["factual"] = NumberOrNull(e.losses.factual);
      if (term == "sal") losses["sal"] = NumberOrNull(e.losses.sal);
    }
    losses["total"] = NumberOrNull(e.losses.total);
    je["losses"] = losses;
    je["cf_skipped"] = e.losses.cf_skipped;
    je["factual_skipped"] = e.losses.factual_skipped;
    epochs.push_back(je);
  }
  j["epochs"] = epochs;
  Json reports = Json::array();
  for (const auto& r : record.reports) reports.push_back(ReportToJson(r));
  j["reports"] = reports;
  return j.dump(2) + "\n";
}

std::vector<RunRecord> RunExperiment(const ExperimentConfig& config,
                                     const LogFn& log) {
  config.Validate();
  auto say = [&](const std::string& line) {
    if (log) log(line);
  };
  const PreparedData data = PrepareData(config);
  const fs::path out_dir = config.output_dir;
  fs::create_directories(out_dir);
  SaveConfig(out_dir / "config.json", config);
  std::ofstream timing(out_dir / "timing.log", std::ios::app);

  const std::string hash = ConfigHash(config);
  const std::string model = config.ModelName();
  const int k = config.num_classes;
  std::vector<RunRecord> records;
  std::vector<eval::MetricRow> rows;
  for (std::uint64_t seed : config.seeds) {
    const auto start = std::chrono::steady_clock::now();
    say(model + " seed " + std::to_string(seed) + ": training on " +
        std::to_string(data.train.size()) + " examples");
    TrainResult trained =
        Train(config, data.train, data.val, seed, [&](const EpochLog& e) {
          char line[160];
          std::snprintf(line, sizeof(line),
                        "  epoch %d lr %.4g loss %.4f val_acc %.4f", e.epoch,
                        e.lr, e.losses.total, e.val_accuracy);
          say(line);
        });

    RunRecord record;
    record.config_hash = hash;
    record.model = model;
    record.seed = seed;
    record.loss_terms = ActiveTerms(config.Loss());
    record.epochs = trained.epochs;
    record.best_epoch = trained.best_epoch;
    record.last_epoch =
        trained.epochs.empty() ? 0 : trained.epochs.back().epoch;
    record.best_val_accuracy = trained.best_val_accuracy;
    record.rejected_steps = trained.rejected_steps;
    record.train_size = static_cast<int>(data.train.size());
    record.status = trained.status;
    record.diagnostic = trained.diagnostic;

    const fs::path seed_dir = out_dir / ("seed_" + std::to_string(seed));
    fs::create_directories(seed_dir);
    if (trained.status == "ok") {
      for (const std::string& split : config.splits) {
        eval::MetricReport report =
            eval::EvaluateSplit(trained.net, split, data.test.at(split));
        if (split == "mixed_next") {
          report.next_class_shift = eval::NextClassShift(
              eval::NetworkProbabilities(trained.net), data.test.at("original"),
              data.test.at(split), k);
        }
        rows.push_back({model, seed, report});
        record.reports.push_back(std::move(report));
      }
      nn::SaveCheckpoint(seed_dir / "model.ckpt", trained.net);
    } else {
      say("  aborted: " + trained.diagnostic);
    }
    record.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    WriteText(seed_dir / "record.json", RunRecordToJson(record));
    timing << "model=" << model << " seed=" << seed
           << " wall_seconds=" << record.wall_seconds << "\n";
    timing.flush();
    eval::WriteMetricsCsv(out_dir / "metrics.csv", rows);
    records.push_back(std::move(record));
  }
  return records;
}

SweepAxis ParseSweepAxis(const std::string& name) {
  if (name == "lambda_sal") return SweepAxis::kLambdaSal;
  if (name == "fgsm_eps") return SweepAxis::kFgsmEps;
  if (name == "data_ratio") return SweepAxis::kDataRatio;
  if (name == "cf_method") return SweepAxis::kCfMethod;
  if (name == "f_method") return SweepAxis::kFMethod;
  throw InvalidArgument("unknown sweep axis '" + name + "'");
}

std::string ToString(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kLambdaSal:
      return "lambda_sal";
    case SweepAxis::kFgsmEps:
      return "fgsm_eps";
    case SweepAxis::kDataRatio:
      return "data_ratio";
    case SweepAxis::kCfMethod:
      return "cf_method";
    case SweepAxis::kFMethod:
      return "f_method";
  }
  return "?";
}

ExperimentConfig ApplySweepValue(const ExperimentConfig& base, SweepAxis axis,
                                 const std::string& value) {
  ExperimentConfig c = base;
  switch (axis) {
    case SweepAxis::kLambdaSal:
      c.sal_enabled = true;
      SetConfigField(c, "lambda_sal", value);
      break;
    case SweepAxis::kFgsmEps:
      c.f_enabled = true;
      c.f_infill = "fgsm";
      SetConfigField(c, "fgsm_epsilon", value);
      break;
    case SweepAxis::kDataRatio:
      SetConfigField(c, "data_ratio", value);
      break;
    case SweepAxis::kCfMethod:
      c.cf_enabled = true;
      c.cf_infill = std::string(ToString(ParseCfInfill(value)));
      break;
    case SweepAxis::kFMethod:
      c.f_enabled = true;
      c.f_infill = std::string(ToString(ParseFInfill(value)));
      break;
  }
  c.output_dir =
      (fs::path(base.output_dir) / (ToString(axis) + "=" + value)).string();
  c.Validate();
  return c;
}

SweepResult Sweep(const ExperimentConfig& base, SweepAxis axis,
                  const std::vector<std::string>& values, const LogFn& log) {
  if (values.empty()) throw InvalidArgument("sweep needs at least one value");
  // Reject bad values before any training starts.
  for (const auto& v : values) ApplySweepValue(base, axis, v);

  SweepResult result;
  result.table.header = {"axis", "value", "model", "seed", "split"};
  for (std::size_t i = 3; i < std::size(eval::kMetricColumns); ++i) {
    result.table.header.push_back(eval::kMetricColumns[i]);
  }
  result.scatter.header = {"axis",  "value",         "seed",
                           "split", "saliency_aupr", "accuracy"};
  result.summary.header = {"split", "points", "r_squared"};
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>>
      points;
  std::vector<std::string> split_order;
  const std::string axis_name = ToString(axis);
  for (const std::string& value : values) {
    const ExperimentConfig config = ApplySweepValue(base, axis, value);
    for (const RunRecord& record : RunExperiment(config, log)) {
      for (const auto& r : record.reports) {
        const std::string seed = std::to_string(record.seed);
        result.table.AddRow(
            {axis_name, value, record.model, seed, r.split,
             FormatDouble(r.accuracy), FormatDouble(r.macro_auc),
             FormatDouble(r.saliency_aupr), FormatDouble(r.next_class_shift)});
        result.scatter.AddRow({axis_name, value, seed, r.split,
                               FormatDouble(r.saliency_aupr),
                               FormatDouble(r.accuracy)});
        if (!points.count(r.split)) split_order.push_back(r.split);
        if (std::isfinite(r.saliency_aupr) && std::isfinite(r.accuracy)) {
          points[r.split].first.push_back(r.saliency_aupr);
          points[r.split].second.push_back(r.accuracy);
        } else {
          points[r.split];
        }
      }
    }
  }
  for (const std::string& split : split_order) {
    const auto& [xs, ys] = points[split];
    double r2 = kNaN;
    try {
      r2 = eval::RSquared(xs, ys);
    } catch (const InvalidArgument&) {
    }
    result.summary.AddRow({split, std::to_string(xs.size()), FormatDouble(r2)});
  }
  const fs::path out = base.output_dir;
  fs::create_directories(out);
  WriteCsv(out / "sweep.csv", result.table);
  WriteCsv(out / "scatter.csv", result.scatter);
  WriteCsv(out / "r_squared.csv", result.summary);
  return result;
}

Report BuildReport(const std::vector<eval::MetricRow>& rows,
                   const std::string& baseline_model) {
  if (rows.empty()) throw InvalidArgument("no run records to report");
  static const char* kMetrics[] = {"accuracy", "macro_auc", "saliency_aupr",
                                   "next_class_shift"};
  std::vector<std::string> models, splits;
  // [model][split][metric] -> values across seeds
  std::map<std::string,
           std::map<std::string, std::map<std::string, std::vector<double>>>>
      values;
  std::set<std::tuple<std::string, std::uint64_t, std::string>> seen;
  for (const auto& row : rows) {
    const auto& r = row.report;
    if (!seen.insert({row.model, row.seed, r.split}).second) {
      throw InvalidArgument("duplicate record for model '" + row.model +
                            "', seed " + std::to_string(row.seed) +
                            ", split '" + r.split + "'");
    }
    if (std::find(models.begin(), models.end(), row.model) == models.end()) {
      models.push_back(row.model);
    }
    if (std::find(splits.begin(), splits.end(), r.split) == splits.end()) {
      splits.push_back(r.split);
    }
    auto& cell = values[row.model][r.split];
    const double metric_values[] = {r.accuracy, r.macro_auc, r.saliency_aupr,
                                    r.next_class_shift};
    for (int m = 0; m < 4; ++m) {
      if (std::isfinite(metric_values[m])) {
        cell[kMetrics[m]].push_back(metric_values[m]);
      }
    }
  }

  auto stats = [&](const std::string& model, const std::string& split,
                   const std::string& metric, double* mean, double* std_dev) {
    const auto& v = values[model][split][metric];
    if (v.empty()) return std::size_t{0};
    *mean = Mean(v);
    *std_dev = SampleStd(v);
    return v.size();
  };
  const bool has_baseline = values.count(baseline_model) > 0;

  Report report;
  report.table.header = {"model", "split", "metric",         "n",
                         "mean",  "std",   "rel_improvement"};
  for (const auto& model : models) {
    for (const auto& split : splits) {
      for (const char* metric : kMetrics) {
        double mean = 0.0, sd = 0.0;
        const std::size_t n = stats(model, split, metric, &mean, &sd);
        if (n == 0) continue;
        double rel = kNaN;
        double base = 0.0, base_sd = 0.0;
        if (std::string(metric) == "accuracy" && has_baseline &&
            stats(baseline_model, split, metric, &base, &base_sd) > 0 &&
            base > 0.0) {
          rel = 100.0 * (mean - base) / base;
        }
        report.table.AddRow({model, split, metric, std::to_string(n),
                             FormatDouble(mean), FormatDouble(sd),
                             FormatDouble(rel)});
      }
    }
  }

  std::string md = "# Results\n\nMean (std) over seeds; values in percent.\n";
  static const char* kTitles[] = {"Accuracy", "Macro one-vs-rest AUC",
                                  "Foreground saliency AUPR",
                                  "Next-class probability shift"};
  for (int m = 0; m < 4; ++m) {
    std::string body;
    for (const auto& model : models) {
      std::string line = "| " + model + " |";
      bool any = false;
      for (const auto& split : splits) {
        double mean = 0.0, sd = 0.0;
        if (stats(model, split, kMetrics[m], &mean, &sd) > 0) {
          line += " " + Percent(mean) + " (" + Percent(sd) + ") |";
          any = true;
        } else {
          line += " - |";
        }
      }
      if (any) body += line + "\n";
    }
    if (body.empty()) continue;
    md += "\n## " + std::string(kTitles[m]) + "\n\n| model |";
    std::string rule = "|---|";
    for (const auto& split : splits) {
      md += " " + split + " |";
      rule += "---|";
    }
    md += "\n" + rule + "\n" + body;
  }
  if (has_baseline) {
    md += "\n## Relative accuracy improvement over " + baseline_model +
          " (%)\n\n| model |";
    std::string rule = "|---|";
    for (const auto& split : splits) {
      md += " " + split + " |";
      rule += "---|";
    }
    md += "\n" + rule + "\n";
    for (const auto& model : models) {
      md += "| " + model + " |";
      for (const auto& split : splits) {
        double mean = 0.0, sd = 0.0, base = 0.0, base_sd = 0.0;
        if (stats(model, split, "accuracy", &mean, &sd) > 0 &&
            stats(baseline_model, split, "accuracy", &base, &base_sd) > 0 &&
            base > 0.0) {
          char buf[32];
          std::snprintf(buf, sizeof(buf), "%+.1f",
                        100.0 * (mean - base) / base);
          md += std::string(" ") + buf + " |";
        } else {
          md += " - |";
        }
      }
      md += "\n";
    }
  }
  report.markdown = md;
  return report;
}

Report WriteReport(const fs::path& run_dir, const std::string& baseline_model) {
  if (!fs::is_directory(run_dir)) {
    throw IoError("run directory " + run_dir.string() + " does not exist");
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(run_dir)) {
    if (entry.is_regular_file() && entry.path().filename() == "metrics.csv") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<eval::MetricRow> rows;
  for (const auto& file : files) {
    auto part = eval::ReadMetricsCsv(file);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  if (rows.empty()) {
    throw InvalidArgument("no run records found under " + run_dir.string());
  }
  Report report = BuildReport(rows, baseline_model);
  WriteText(run_dir / "report.md", report.markdown);
  WriteCsv(run_dir / "report.csv", report.table);
  return report;
}

AugmentSummary AugmentOffline(const fs::path& dataset_dir,
                              const fs::path& out_dir,
                              const AugmentOptions& options) {
  if (options.recipes.empty()) throw InvalidArgument("no augmentation recipe");
  struct Recipe {
    std::string name;
    bool counterfactual;
    loss::LossConfig config;
  };
  std::vector<Recipe> recipes;
  bool needs_net = false;
  for (const std::string& name : options.recipes) {
    Recipe r{name, false, {}};
    r.config.cf_use_bbox = options.cf_use_bbox;
    r.config.f_use_bbox = options.f_use_bbox;
    r.config.external_infill_dir = options.external_infill_dir;
    r.config.fgsm_epsilon = options.fgsm_epsilon;
    if (name.rfind("cf-", 0) == 0) {
      r.counterfactual = true;
      r.config.cf_enabled = true;
      r.config.cf_infill = ParseCfInfill(name.substr(3));
    } else if (name.rfind("f-", 0) == 0) {
      r.config.f_enabled = true;
      r.config.f_infill = ParseFInfill(name.substr(2));
      needs_net = needs_net || r.config.f_infill == FInfill::kFgsm;
    } else {
      throw InvalidArgument("recipe '" + name +
                            "' must look like cf-<infill> or f-<infill>");
    }
    r.config.Validate();
    recipes.push_back(std::move(r));
  }
  if (fs::exists(out_dir) && fs::equivalent(dataset_dir, out_dir)) {
    throw InvalidArgument("output directory must differ from the dataset");
  }
  nn::Network<float> net;
  if (needs_net) {
    if (options.checkpoint.empty()) {
      throw InvalidArgument("f-fgsm needs a model checkpoint");
    }
    net = nn::LoadCheckpoint(options.checkpoint);
  }

  AugmentSummary summary;
  summary.manifest.header = {"source_id", "method", "output_path",
                             "label_action"};
  summary.errors.header = {"source_id", "method", "error"};
  std::vector<LabeledExample> examples;
  for (const DatasetEntry& entry : ReadLabels(dataset_dir)) {
    try {
      examples.push_back(LoadExample(dataset_dir, entry));
    } catch (const std::exception& e) {
      summary.errors.AddRow({entry.id, "load", e.what()});
    }
  }
  std::vector<const LabeledExample*> pool;
  for (const auto& ex : examples) pool.push_back(&ex);

  fs::create_directories(out_dir / "images");
  for (const LabeledExample& ex : examples) {
    for (std::size_t i = 0; i < recipes.size(); ++i) {
      const Recipe& recipe = recipes[i];
      try {
        Rng rng(DeriveSeed(options.seed, {Fnv1a(ex.id), i}));
        Image out;
        if (recipe.counterfactual) {
          out = loss::MakeCounterfactual(ex, recipe.config, rng);
        } else if (recipe.config.f_infill == FInfill::kFgsm) {
          out = loss::FgsmBackground(net, ex.image,
                                     loss::FactualRegion(ex, recipe.config),
                                     ex.label, recipe.config.fgsm_epsilon);
        } else if (!loss::MakeFactual(ex, pool, recipe.config, rng, &out)) {
          throw InvalidArgument("no donor of another class");
        }
        const std::string rel = "images/" + ex.id + "__" + recipe.name + ".png";
        WritePngImage(out_dir / rel, out);
        summary.manifest.AddRow(
            {ex.id, recipe.name, rel,
             recipe.counterfactual ? "counterfactual" : "keep"});
      } catch (const std::exception& e) {
        summary.errors.AddRow({ex.id, recipe.name, e.what()});
      }
    }
  }
  WriteCsv(out_dir / "manifest.csv", summary.manifest);
  WriteCsv(out_dir / "errors.csv", summary.errors);
  return summary;
}

}  // namespace cfaug
