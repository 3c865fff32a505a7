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

// Throughput of the mask-conditioned augmentation primitives.

#include <benchmark/benchmark.h>

#include "cfaug/augment.h"
#include "cfaug/random.h"
#include "cfaug/synthbench.h"

namespace cfaug {
namespace {

using synth::LabeledExample;

LabeledExample Example(int size) {
  synth::SynthSpec spec;
  spec.num_classes = 5;
  spec.image_size = size;
  spec.samples_per_class = 1;
  return synth::GenerateDataset(spec).front();
}

void BM_ComposeCounterfactualGrey(benchmark::State& state) {
  const LabeledExample ex = Example(static_cast<int>(state.range(0)));
  const InfillSample grey = InfillGrey(ex.image.shape());
  for (auto _ : state) {
    benchmark::DoNotOptimize(ComposeCounterfactual(ex.image, ex.region, grey));
  }
}
BENCHMARK(BM_ComposeCounterfactualGrey)->Arg(32)->Arg(64);

void BM_FactualShuffle(benchmark::State& state) {
  const LabeledExample ex = Example(static_cast<int>(state.range(0)));
  const Region background = ex.region.Complement();
  Rng rng(1);
  for (auto _ : state) {
    const InfillSample s = InfillShuffle(ex.image, background, rng);
    benchmark::DoNotOptimize(ComposeFactual(ex.image, ex.region, s));
  }
}
BENCHMARK(BM_FactualShuffle)->Arg(32)->Arg(64);

void BM_FactualRandom(benchmark::State& state) {
  const LabeledExample ex = Example(static_cast<int>(state.range(0)));
  Rng rng(2);
  for (auto _ : state) {
    const InfillSample s = InfillRandom(ex.image.shape(), rng);
    benchmark::DoNotOptimize(ComposeFactual(ex.image, ex.region, s));
  }
}
BENCHMARK(BM_FactualRandom)->Arg(32)->Arg(64);

void BM_LargestBackgroundRectangle(benchmark::State& state) {
  const LabeledExample ex = Example(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(LargestBackgroundRectangle(ex.region));
  }
}
BENCHMARK(BM_LargestBackgroundRectangle)->Arg(32)->Arg(64)->Arg(128);

void BM_InfillTile(benchmark::State& state) {
  const LabeledExample ex = Example(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(InfillTile(ex.image, ex.region));
  }
}
BENCHMARK(BM_InfillTile)->Arg(32)->Arg(64);

}  // namespace
}  // namespace cfaug
