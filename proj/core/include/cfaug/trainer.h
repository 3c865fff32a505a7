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

#ifndef CFAUG_TRAINER_H_
#define CFAUG_TRAINER_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cfaug/config.h"
#include "cfaug/network.h"
#include "cfaug/objectives.h"

namespace cfaug {

struct EpochLog {
  int epoch = 0;  // 1-based
  double lr = 0.0;
  loss::LossBreakdown losses;  // batch means; skip counts are epoch totals
  double val_accuracy = 0.0;
};

struct TrainResult {
  nn::Network<float> net;  // parameters of the best validation epoch
  std::vector<EpochLog> epochs;
  int best_epoch = 0;  // 0 = the initialization was never improved upon
  double best_val_accuracy = 0.0;
  int rejected_steps = 0;
  std::string status = "ok";  // or "non_finite_loss"
  std::string diagnostic;
};

using EpochCallback = std::function<void(const EpochLog&)>;

// Minibatch SGD on the configured total loss with step learning-rate decay.
// Validation accuracy is measured after every epoch; the best parameters are
// kept and training stops after `patience` epochs without improvement. A
// non-finite loss ends training early with status "non_finite_loss" and the
// best parameters seen so far.
TrainResult Train(const ExperimentConfig& config,
                  const std::vector<synth::LabeledExample>& train,
                  const std::vector<synth::LabeledExample>& val,
                  std::uint64_t seed, const EpochCallback& on_epoch = {});

// Fraction of `examples` whose argmax prediction equals the label.
double EvaluateAccuracy(const nn::Network<float>& net,
                        const std::vector<synth::LabeledExample>& examples);

}  // namespace cfaug

#endif  // CFAUG_TRAINER_H_
