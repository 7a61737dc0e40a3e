// Copyright 2026 The Archsmith Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Parallel kernels against their serial references.

#include <benchmark/benchmark.h>

#include <vector>

#include "archsmith/bayesnet.h"
#include "archsmith/experiments.h"
#include "archsmith/metamodel.h"

namespace archsmith {
namespace {

Dataset RandomData(int vars, int rows) {
  Rng rng(1);
  Dataset d;
  for (int v = 0; v < vars; ++v) {
    d.cardinalities.push_back(2 + v % 4);
    std::vector<int> col(rows);
    for (int& x : col) x = static_cast<int>(UniformIndex(rng, d.cardinalities[v]));
    d.columns.push_back(std::move(col));
  }
  return d;
}

void BM_MiMatrix(benchmark::State& state) {
  Dataset d = RandomData(static_cast<int>(state.range(0)), 2000);
  for (auto _ : state) benchmark::DoNotOptimize(ComputeMiMatrix(d));
}

void BM_MiMatrixSerial(benchmark::State& state) {
  Dataset d = RandomData(static_cast<int>(state.range(0)), 2000);
  for (auto _ : state) benchmark::DoNotOptimize(ComputeMiMatrixSerial(d));
}

struct ScoringFixture {
  Metamodel model;
  std::vector<GanSpec> gans;
  ScoringFixture() {
    MetamodelConfig c;
    c.genotype = GenotypeConfig::PerNetwork();
    Rng rng(2);
    std::vector<Individual> train;
    for (int i = 0; i < 500; ++i) train.push_back({RandomGan(c.genotype, rng), 0.0, "r", "p"});
    model = Learn(train, c);
    for (int i = 0; i < 5000; ++i) gans.push_back(RandomGan(c.genotype, rng));
  }
};

const ScoringFixture& Fixture() {
  static const ScoringFixture f;
  return f;
}

void BM_ScoreBatch(benchmark::State& state) {
  const ScoringFixture& f = Fixture();
  for (auto _ : state) benchmark::DoNotOptimize(ScoreBatch(f.model, f.gans));
}

void BM_ScoreBatchSerial(benchmark::State& state) {
  const ScoringFixture& f = Fixture();
  for (auto _ : state) benchmark::DoNotOptimize(ScoreBatchSerial(f.model, f.gans));
}

void BM_GenerateRuns(benchmark::State& state) {
  ExperimentConfig c;
  c.parallel = state.range(0) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(GenerateRuns(c));
}

BENCHMARK(BM_MiMatrix)->Arg(16)->Arg(64);
BENCHMARK(BM_MiMatrixSerial)->Arg(16)->Arg(64);
BENCHMARK(BM_ScoreBatch);
BENCHMARK(BM_ScoreBatchSerial);
BENCHMARK(BM_GenerateRuns)->ArgName("parallel")->Arg(0)->Arg(1);

}  // namespace
}  // namespace archsmith

BENCHMARK_MAIN();
