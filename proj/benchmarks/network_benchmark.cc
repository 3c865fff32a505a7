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

// Forward and training-step cost of the small CNN at the default width.

#include <benchmark/benchmark.h>

#include <span>
#include <vector>

#include "cfaug/network.h"
#include "cfaug/objectives.h"
#include "cfaug/synthbench.h"

namespace cfaug {
namespace {

using synth::LabeledExample;

constexpr int kBatch = 64;

std::vector<LabeledExample> Batch() {
  synth::SynthSpec spec;
  spec.num_classes = 5;
  spec.image_size = 32;
  spec.samples_per_class = kBatch / 5 + 1;
  std::vector<LabeledExample> out = synth::GenerateDataset(spec);
  out.resize(kBatch);
  return out;
}

std::vector<const LabeledExample*> Pointers(
    const std::vector<LabeledExample>& examples) {
  std::vector<const LabeledExample*> out;
  for (const auto& ex : examples) out.push_back(&ex);
  return out;
}

void BM_Forward(benchmark::State& state) {
  const auto examples = Batch();
  std::vector<Image> images;
  for (const auto& ex : examples) images.push_back(ex.image);
  const nn::Network<float> net(nn::NetworkSpec{}, 1);
  const nn::Tensor<float> batch =
      nn::MakeBatch<float>(std::span<const Image>(images));
  for (auto _ : state) benchmark::DoNotOptimize(net.Logits(batch));
  state.SetItemsProcessed(state.iterations() * kBatch);
}
BENCHMARK(BM_Forward);

// One loss evaluation with gradients; range(0) selects the loss terms.
void BM_TotalLoss(benchmark::State& state) {
  const auto examples = Batch();
  const auto batch = Pointers(examples);
  const nn::Network<float> net(nn::NetworkSpec{}, 1);
  loss::LossConfig config;
  config.cf_enabled = config.f_enabled = state.range(0) == 1;
  config.f_infill = FInfill::kShuffle;
  loss::InfillCache cache;
  std::uint64_t step = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        loss::TotalLoss(net, std::span<const LabeledExample* const>(batch),
                        config, ++step, &cache));
  }
  state.SetItemsProcessed(state.iterations() * kBatch);
  state.SetLabel(state.range(0) == 1 ? "ce+cf+f" : "ce");
}
BENCHMARK(BM_TotalLoss)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace cfaug
