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

#ifndef ARCHSMITH_SEARCH_H_
#define ARCHSMITH_SEARCH_H_

#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "archsmith/archive.h"
#include "archsmith/genotype.h"
#include "archsmith/landscape.h"
#include "archsmith/metamodel.h"

namespace archsmith {

struct AddLayer {
  Role role;
  int position;  // insertion index, 0..depth
  LayerSpec layer;
};

struct DeleteLayer {
  Role role;
  int position;
};

// Changes activation, weight init or size bin of one layer. Layer kind is
// not mutated in place; it changes through delete + add.
struct ChangeLayer {
  Role role;
  int position;
  LayerAttr attr;
  int value;
};

struct ChangeTrainFreq {
  int value;
};

using MutationOp = std::variant<AddLayer, DeleteLayer, ChangeLayer,
                                ChangeTrainFreq>;

// Throws ValidationError when the result would break depth bounds, role
// legality or attribute ranges.
GanSpec ApplyMutation(const GanSpec& gan, const MutationOp& op,
                      const GenotypeConfig& config);

// Every single-operator move, in a fixed order: train-frequency changes,
// then per role (generator first) layer changes, deletions, insertions.
std::vector<MutationOp> EnumerateMutations(const GanSpec& gan,
                                           const GenotypeConfig& config);

// Distinct genotypes one move away, excluding `gan`, in first-seen order of
// EnumerateMutations.
std::vector<GanSpec> Neighbors(const GanSpec& gan,
                               const GenotypeConfig& config);

// Picks add / delete / change uniformly among the applicable kinds, then the
// move parameters uniformly. Always returns a genotype different from `gan`
// unless no move applies.
GanSpec RandomMutation(const GanSpec& gan, const GenotypeConfig& config,
                       Rng& rng);

// Swaps networks: (g1, d1) x (g2, d2) -> (g1, d2), (g2, d1). Each child keeps
// the training frequency of the parent its generator came from.
std::pair<GanSpec, GanSpec> Crossover(const GanSpec& a, const GanSpec& b);

// 1 x 1 network with uniformly drawn attributes.
GanSpec MinimalStart(const GenotypeConfig& config, Rng& rng);

struct SearchStep {
  std::uint64_t candidate_hash = 0;
  double fitness = 0.0;
  bool accepted = false;
  double best = 0.0;
  bool exhausted = false;  // no-op padding after the neighbourhood ran out
};

struct SearchTrace {
  double start_fitness = 0.0;
  std::vector<SearchStep> steps;  // exactly `budget` entries
  GanSpec best;
};

// Evaluates `start` (not charged to the budget), then repeatedly draws one
// uniform neighbour of the incumbent and moves iff it is strictly better.
SearchTrace RandomHc(const SurrogateLandscape& landscape, const GanSpec& start,
                     int budget, Rng& rng);

// Ranks all neighbours of the incumbent by normalized metamodel score minus
// the normalized score of the uniform model over the same depths, so an
// uninformative metamodel ranks every neighbour equally (ties broken by a
// seeded uniform key) and evaluates the best-ranked one not yet
// tried from this incumbent; moves iff strictly better. When every neighbour
// has been tried the search stops and the trace is padded with exhausted
// no-op steps.
SearchTrace GuidedHc(const SurrogateLandscape& landscape, const Metamodel& mm,
                     const GanSpec& start, int budget, Rng& rng);

struct Population {
  std::vector<GanSpec> members;
  std::vector<double> fitness;
  std::size_t size() const { return members.size(); }
  std::size_t BestIndex() const;
};

enum class InitStrategy { kRandom, kFromFirst, kFromMetamodel };
const char* InitStrategyName(InitStrategy s);
InitStrategy ParseInitStrategy(const std::string& name);

struct InitSource {
  const std::vector<Individual>* elites = nullptr;
  const Metamodel* metamodel = nullptr;
};

// random: RandomGan; from_first: uniform draws with replacement from the
// elites; from_metamodel: metamodel samples. Members are evaluated on
// `landscape`. Throws ValidationError when the required source is missing.
Population InitPopulation(InitStrategy strategy, int size,
                          const InitSource& source,
                          const SurrogateLandscape& landscape, Rng& rng);

struct EaConfig {
  int population = 20;
  int generations = 20;  // including the initial population
  double crossover_rate = 0.5;
  double mutation_rate = 0.8;
  int tournament = 2;
  int elitism = 1;

  Json ToJson() const;
  static EaConfig FromJson(const Json& j);
};

using GenerationCallback =
    std::function<void(int generation, const Population& population)>;

// Generational EA. Generation 0 is `init`; each later generation keeps the
// `elitism` best members and fills the rest with tournament-selected parents,
// network-swap crossover and one random mutation per child. Returns the best
// fitness of each generation (length == config.generations).
std::vector<double> SimpleEa(const SurrogateLandscape& landscape,
                             Population init, const EaConfig& config, Rng& rng,
                             const GenerationCallback& on_generation = {});

}  // namespace archsmith

#endif  // ARCHSMITH_SEARCH_H_
