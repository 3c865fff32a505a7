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

#include "cfaug/trainer.h"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cfaug {
namespace {

enum StreamTag : std::uint64_t {
  kInitStream = 0x1417,
  kOrderStream = 0x0bde,
  kStepStream = 0x57e9,
};

constexpr int kEvalBatch = 256;

}  // namespace

double EvaluateAccuracy(const nn::Network<float>& net,
                        const std::vector<synth::LabeledExample>& examples) {
  if (examples.empty()) throw InvalidArgument("accuracy of an empty split");
  const int k = net.spec().num_classes;
  std::size_t hits = 0;
  for (std::size_t start = 0; start < examples.size(); start += kEvalBatch) {
    const std::size_t end = std::min(examples.size(), start + kEvalBatch);
    std::vector<const Image*> images;
    for (std::size_t i = start; i < end; ++i)
      images.push_back(&examples[i].image);
    const auto logits =
        net.Logits(nn::MakeBatch<float>(std::span<const Image* const>(images)));
    for (std::size_t i = start; i < end; ++i) {
      const float* row = logits.data() + (i - start) * k;
      const int pred = static_cast<int>(std::max_element(row, row + k) - row);
      hits += pred == examples[i].label;
    }
  }
  return static_cast<double>(hits) / examples.size();
}

TrainResult Train(const ExperimentConfig& config,
                  const std::vector<synth::LabeledExample>& train,
                  const std::vector<synth::LabeledExample>& val,
                  std::uint64_t seed, const EpochCallback& on_epoch) {
  config.Validate();
  if (train.empty()) throw InvalidArgument("empty training set");
  if (val.empty()) throw InvalidArgument("empty validation set");
  const loss::LossConfig loss_config = config.Loss();

  nn::Network<float> net(config.Network(), DeriveSeed(seed, {kInitStream}));
  nn::SgdOptimizer<float> optimizer;
  loss::InfillCache cache;
  Rng order_rng(DeriveSeed(seed, {kOrderStream}));

  TrainResult result;
  result.net = net;
  result.best_val_accuracy = EvaluateAccuracy(net, val);

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t batch_size = static_cast<std::size_t>(config.batch_size);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const nn::SgdOptions sgd = config.Sgd(epoch);
    std::shuffle(order.begin(), order.end(), order_rng);
    EpochLog log;
    log.epoch = epoch;
    log.lr = sgd.lr;
    int batches = 0;
    bool diverged = false;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      const std::size_t end = std::min(order.size(), start + batch_size);
      std::vector<const synth::LabeledExample*> batch;
      for (std::size_t i = start; i < end; ++i)
        batch.push_back(&train[order[i]]);
      const std::uint64_t step_seed =
          DeriveSeed(seed, {kStepStream, static_cast<std::uint64_t>(epoch),
                            static_cast<std::uint64_t>(start)});
      auto step = loss::TotalLoss(net, std::span(batch), loss_config, step_seed,
                                  &cache);
      const auto& l = step.losses;
      if (!std::isfinite(l.total)) {
        result.status = "non_finite_loss";
        result.diagnostic =
            "non-finite loss at epoch " + std::to_string(epoch) +
            ", batch offset " + std::to_string(start) +
            " (ce=" + std::to_string(l.ce) + ", cf=" + std::to_string(l.cf) +
            ", factual=" + std::to_string(l.factual) +
            ", sal=" + std::to_string(l.sal) + ")";
        diverged = true;
        break;
      }
      optimizer.Step(net, step.grads, sgd);
      log.losses.ce += l.ce;
      log.losses.cf += l.cf;
      log.losses.factual += l.factual;
      log.losses.sal += l.sal;
      log.losses.total += l.total;
      log.losses.cf_skipped += l.cf_skipped;
      log.losses.factual_skipped += l.factual_skipped;
      ++batches;
    }
    if (diverged) break;
    log.losses.ce /= batches;
    log.losses.cf /= batches;
    log.losses.factual /= batches;
    log.losses.sal /= batches;
    log.losses.total /= batches;
    log.val_accuracy = EvaluateAccuracy(net, val);
    result.epochs.push_back(log);
    if (on_epoch) on_epoch(log);

    if (log.val_accuracy > result.best_val_accuracy) {
      result.best_val_accuracy = log.val_accuracy;
      result.best_epoch = epoch;
      result.net = net;
    } else if (config.patience > 0 &&
               epoch - result.best_epoch >= config.patience) {
      break;
    }
  }
  result.rejected_steps = optimizer.rejected_steps();
  return result;
}

}  // namespace cfaug
