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

// Seeded experiment drivers: archive synthesis and the likelihood, sampling,
// initialization and guided-search studies. Replicates run concurrently;
// results are collected per replicate and written in a fixed order, so
// outputs are byte-identical regardless of thread count.

#ifndef ARCHSMITH_EXPERIMENTS_H_
#define ARCHSMITH_EXPERIMENTS_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "archsmith/archive.h"
#include "archsmith/landscape.h"
#include "archsmith/metamodel.h"
#include "archsmith/search.h"
#include "archsmith/stats.h"

namespace archsmith {

// Everything an experiment reads. Loaded from a JSON object with the same
// keys; missing keys keep their defaults.
struct ExperimentConfig {
  std::string experiment;  // likelihood | sampling | initialization | guided-search
  LandscapeConfig landscape;
  MetamodelConfig metamodel;  // genotype is taken from `landscape`
  EaConfig ea;
  std::uint64_t seed = 0;

  // Archive synthesis.
  std::vector<std::uint64_t> archive_seeds = {1, 2, 3, 4, 5};
  int runs_per_landscape = 6;

  // Set extraction and metamodel training.
  int n = 5;
  std::vector<std::uint64_t> train_seeds;  // empty: every archive problem
  std::vector<std::uint64_t> holdout_seeds = {101, 102, 103};
  std::uint64_t target_seed = 1001;
  bool uniform_metamodel = false;  // uninformative model, for null controls

  int replicates = 30;
  int samples = 100;
  int budget = 100;
  int min_scored = 30;  // depth keys with fewer scored individuals are skipped
  bool parallel = true;

  Json ToJson() const;
  // Throws ValidationError on unknown experiment ids or bad counts.
  static ExperimentConfig FromJson(const Json& j);
  void Validate() const;
};

// Shortest decimal that round-trips.
std::string FormatDouble(double v);

std::string ProblemId(std::uint64_t landscape_seed);

// One EA run per (archive seed, run index), every population member of every
// generation logged.
std::vector<Run> GenerateRuns(const ExperimentConfig& config);
void WriteArchive(std::ostream& out, const std::vector<Run>& runs,
                  const GenotypeConfig& config);
// Runs belonging to the training problems.
RunArchive TrainingArchive(const RunArchive& archive,
                           const ExperimentConfig& config);
// Learns on the First set of the training runs, or returns the uniform model.
Metamodel TrainMetamodel(const EliteSets& sets, const ExperimentConfig& config);

struct LikelihoodRow {
  std::string set;  // first | second | random
  std::string run_id;
  DepthKey key;
  double fitness = 0.0;
  ScoreResult score;
};

struct KeyTest {
  DepthKey key;
  int sizes[3] = {0, 0, 0};  // first, second, random
  bool tested = false;       // enough individuals and >= 2 non-empty sets
  TestResult kw;
  // Raw and Bonferroni p for (first, second), (first, random),
  // (second, random); NaN when a set is empty.
  double dunn_raw[3];
  double dunn_bonferroni[3];
};

struct LikelihoodResult {
  EliteSets sets;
  std::vector<LikelihoodRow> rows;
  std::vector<KeyTest> tests;
};

LikelihoodResult RunLikelihood(const RunArchive& archive,
                               const ExperimentConfig& config);
void WriteLikelihoodCsv(std::ostream& out, const LikelihoodResult& r);
void WriteLikelihoodTests(std::ostream& out, const LikelihoodResult& r);

struct SamplingRow {
  std::uint64_t landscape_seed = 0;
  std::string set;  // sampled | first | random
  int index = 0;
  DepthKey key;
  double fitness = 0.0;
};

struct SamplingTest {
  std::uint64_t landscape_seed = 0;
  double mean[3] = {0, 0, 0};  // sampled, first, random
  TestResult sampled_vs_random;
  TestResult sampled_vs_first;
};

struct SamplingResult {
  std::vector<SamplingRow> rows;
  std::vector<SamplingTest> tests;
};

SamplingResult RunSampling(const RunArchive& archive,
                           const ExperimentConfig& config);
void WriteSamplingCsv(std::ostream& out, const SamplingResult& r);
void WriteSamplingTests(std::ostream& out, const SamplingResult& r);

inline constexpr InitStrategy kInitStrategies[] = {
    InitStrategy::kRandom, InitStrategy::kFromFirst,
    InitStrategy::kFromMetamodel};

struct InitializationResult {
  // best[strategy][replicate][generation]
  std::vector<std::vector<std::vector<double>>> best;
};

InitializationResult RunInitialization(const RunArchive& archive,
                                       const ExperimentConfig& config);
void WriteInitializationCsv(std::ostream& out, const InitializationResult& r,
                            const ExperimentConfig& config);

enum class SearchAlgo { kRandomHc, kGuidedHc };
const char* SearchAlgoName(SearchAlgo a);
SearchAlgo ParseSearchAlgo(const std::string& name);

// One trace per seed. Seed s starts from MinimalStart drawn with a stream
// that depends only on s, so both algorithms share start points.
std::vector<SearchTrace> RunSearches(SearchAlgo algo,
                                     const SurrogateLandscape& landscape,
                                     const Metamodel* metamodel,
                                     const std::vector<std::uint64_t>& seeds,
                                     int budget, bool parallel);
// Columns: seed, step, fitness, best, accepted; steps 1..budget.
void WriteTraceCsv(std::ostream& out, const std::vector<SearchTrace>& traces,
                   const std::vector<std::uint64_t>& seeds,
                   const char* algo = nullptr);

struct GuidedSearchResult {
  std::vector<std::uint64_t> seeds;
  std::vector<SearchTrace> random;
  std::vector<SearchTrace> guided;
};

GuidedSearchResult RunGuidedSearch(const RunArchive& archive,
                                   const ExperimentConfig& config);
void WriteGuidedCsv(std::ostream& out, const GuidedSearchResult& r);

// Best fitness after `step` evaluations (step 0: the start point).
double BestAt(const SearchTrace& trace, int step);

double Median(std::vector<double> v);

// Reads a whole archive produced by GenerateRuns back through the parser.
RunArchive ArchiveFromRuns(const std::vector<Run>& runs,
                           const GenotypeConfig& config);

}  // namespace archsmith

#endif  // ARCHSMITH_EXPERIMENTS_H_
