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

#include "archsmith/search.h"

#include <algorithm>
#include <numeric>
#include <unordered_map>

namespace archsmith {

namespace {

constexpr LayerAttr kMutableAttrs[] = {LayerAttr::kActivation,
                                       LayerAttr::kWeightInit,
                                       LayerAttr::kSizeBin};

int& AttrRef(LayerSpec& layer, LayerAttr attr) {
  switch (attr) {
    case LayerAttr::kActivation:
      return layer.activation;
    case LayerAttr::kWeightInit:
      return layer.weight_init;
    case LayerAttr::kSizeBin:
      return layer.size_bin;
    case LayerAttr::kKind:
      break;
  }
  throw ValidationError("layer kind is not changed in place");
}

int AttrValue(const LayerSpec& layer, LayerAttr attr) {
  return AttrRef(const_cast<LayerSpec&>(layer), attr);
}

// One changeable slot: train frequency when role is empty.
struct SlotRef {
  bool train_freq = false;
  Role role = Role::kGenerator;
  int position = 0;
  LayerAttr attr = LayerAttr::kActivation;
};

std::vector<SlotRef> ChangeableSlots(const GanSpec& gan,
                                     const GenotypeConfig& config) {
  std::vector<SlotRef> slots;
  if (config.train_freq_bins > 1) slots.push_back({true});
  for (Role role : {Role::kGenerator, Role::kDiscriminator}) {
    for (int p = 0; p < gan.network(role).depth(); ++p) {
      for (LayerAttr attr : kMutableAttrs) {
        if (AttrCardinality(config, role, attr) > 1) {
          slots.push_back({false, role, p, attr});
        }
      }
    }
  }
  return slots;
}

int OtherValue(int current, int cardinality, Rng& rng) {
  int v = static_cast<int>(UniformIndex(rng, cardinality - 1));
  return v >= current ? v + 1 : v;
}

void RecordStep(SearchTrace& trace, std::uint64_t hash, double fitness,
                bool accepted, double best) {
  trace.steps.push_back({hash, fitness, accepted, best, false});
}

void PadExhausted(SearchTrace& trace, int budget, double best) {
  while (static_cast<int>(trace.steps.size()) < budget) {
    trace.steps.push_back({0, best, false, best, true});
  }
}

}  // namespace

GanSpec ApplyMutation(const GanSpec& gan, const MutationOp& op,
                      const GenotypeConfig& config) {
  GanSpec out = gan;
  if (const auto* add = std::get_if<AddLayer>(&op)) {
    auto& layers = out.network(add->role).layers;
    if (add->position < 0 || add->position > static_cast<int>(layers.size())) {
      throw ValidationError("insertion position out of range");
    }
    layers.insert(layers.begin() + add->position, add->layer);
  } else if (const auto* del = std::get_if<DeleteLayer>(&op)) {
    auto& layers = out.network(del->role).layers;
    if (del->position < 0 || del->position >= static_cast<int>(layers.size())) {
      throw ValidationError("deletion position out of range");
    }
    layers.erase(layers.begin() + del->position);
  } else if (const auto* ch = std::get_if<ChangeLayer>(&op)) {
    auto& layers = out.network(ch->role).layers;
    if (ch->position < 0 || ch->position >= static_cast<int>(layers.size())) {
      throw ValidationError("layer position out of range");
    }
    AttrRef(layers[ch->position], ch->attr) = ch->value;
  } else {
    out.train_freq_bin = std::get<ChangeTrainFreq>(op).value;
  }
  ValidateGan(out, config);
  return out;
}

std::vector<MutationOp> EnumerateMutations(const GanSpec& gan,
                                           const GenotypeConfig& config) {
  std::vector<MutationOp> ops;
  for (int v = 0; v < config.train_freq_bins; ++v) {
    if (v != gan.train_freq_bin) ops.push_back(ChangeTrainFreq{v});
  }
  for (Role role : {Role::kGenerator, Role::kDiscriminator}) {
    const DnnSpec& net = gan.network(role);
    for (int p = 0; p < net.depth(); ++p) {
      for (LayerAttr attr : kMutableAttrs) {
        int current = AttrValue(net.layers[p], attr);
        for (int v = 0; v < AttrCardinality(config, role, attr); ++v) {
          if (v != current) ops.push_back(ChangeLayer{role, p, attr, v});
        }
      }
    }
    if (net.depth() > 1) {
      for (int p = 0; p < net.depth(); ++p) ops.push_back(DeleteLayer{role, p});
    }
    if (net.depth() < config.MaxDepth(role)) {
      for (int p = 0; p <= net.depth(); ++p) {
        for (LayerKind kind : LegalKinds(role)) {
          for (int a = 0; a < static_cast<int>(config.activations.size()); ++a) {
            for (int w = 0; w < static_cast<int>(config.weight_inits.size());
                 ++w) {
              for (int s = 0; s < config.size_bins; ++s) {
                ops.push_back(AddLayer{role, p, LayerSpec{kind, a, w, s}});
              }
            }
          }
        }
      }
    }
  }
  return ops;
}

std::vector<GanSpec> Neighbors(const GanSpec& gan,
                               const GenotypeConfig& config) {
  std::vector<GanSpec> out;
  std::unordered_multimap<std::uint64_t, std::size_t> seen;
  const std::uint64_t self = GenotypeHash(gan);
  for (const MutationOp& op : EnumerateMutations(gan, config)) {
    GanSpec n = ApplyMutation(gan, op, config);
    std::uint64_t h = GenotypeHash(n);
    if (h == self && n == gan) continue;
    bool duplicate = false;
    auto [lo, hi] = seen.equal_range(h);
    for (auto it = lo; it != hi && !duplicate; ++it) {
      duplicate = out[it->second] == n;
    }
    if (duplicate) continue;
    seen.emplace(h, out.size());
    out.push_back(std::move(n));
  }
  return out;
}

GanSpec RandomMutation(const GanSpec& gan, const GenotypeConfig& config,
                       Rng& rng) {
  std::vector<Role> can_add, can_delete;
  for (Role role : {Role::kGenerator, Role::kDiscriminator}) {
    int d = gan.network(role).depth();
    if (d < config.MaxDepth(role)) can_add.push_back(role);
    if (d > 1) can_delete.push_back(role);
  }
  std::vector<SlotRef> slots = ChangeableSlots(gan, config);
  enum { kAdd, kDelete, kChange };
  std::vector<int> kinds;
  if (!can_add.empty()) kinds.push_back(kAdd);
  if (!can_delete.empty()) kinds.push_back(kDelete);
  if (!slots.empty()) kinds.push_back(kChange);
  if (kinds.empty()) return gan;

  switch (kinds[UniformIndex(rng, kinds.size())]) {
    case kAdd: {
      Role role = can_add[UniformIndex(rng, can_add.size())];
      int pos = static_cast<int>(
          UniformIndex(rng, gan.network(role).layers.size() + 1));
      LayerSpec layer = RandomLayer(config, role, rng);
      return ApplyMutation(gan, AddLayer{role, pos, layer}, config);
    }
    case kDelete: {
      Role role = can_delete[UniformIndex(rng, can_delete.size())];
      int pos =
          static_cast<int>(UniformIndex(rng, gan.network(role).layers.size()));
      return ApplyMutation(gan, DeleteLayer{role, pos}, config);
    }
    default: {
      const SlotRef& s = slots[UniformIndex(rng, slots.size())];
      if (s.train_freq) {
        return ApplyMutation(
            gan,
            ChangeTrainFreq{OtherValue(gan.train_freq_bin,
                                       config.train_freq_bins, rng)},
            config);
      }
      int current = AttrValue(gan.network(s.role).layers[s.position], s.attr);
      int card = AttrCardinality(config, s.role, s.attr);
      return ApplyMutation(
          gan,
          ChangeLayer{s.role, s.position, s.attr,
                      OtherValue(current, card, rng)},
          config);
    }
  }
}

std::pair<GanSpec, GanSpec> Crossover(const GanSpec& a, const GanSpec& b) {
  GanSpec c1{a.generator, b.discriminator, a.train_freq_bin};
  GanSpec c2{b.generator, a.discriminator, b.train_freq_bin};
  return {std::move(c1), std::move(c2)};
}

GanSpec MinimalStart(const GenotypeConfig& config, Rng& rng) {
  GanSpec gan;
  gan.train_freq_bin = static_cast<int>(
      UniformIndex(rng, static_cast<std::size_t>(config.train_freq_bins)));
  gan.generator.layers.push_back(RandomLayer(config, Role::kGenerator, rng));
  gan.discriminator.layers.push_back(
      RandomLayer(config, Role::kDiscriminator, rng));
  return gan;
}

SearchTrace RandomHc(const SurrogateLandscape& landscape, const GanSpec& start,
                     int budget, Rng& rng) {
  if (budget < 1) throw ValidationError("budget must be >= 1");
  const GenotypeConfig& config = landscape.config().genotype;
  SearchTrace trace;
  GanSpec current = start;
  double current_fitness = landscape.Evaluate(start);
  trace.start_fitness = current_fitness;
  std::vector<GanSpec> neighbors = Neighbors(current, config);
  while (static_cast<int>(trace.steps.size()) < budget) {
    if (neighbors.empty()) break;
    const GanSpec& candidate = neighbors[UniformIndex(rng, neighbors.size())];
    double f = landscape.Evaluate(candidate);
    bool accept = f < current_fitness;
    std::uint64_t h = GenotypeHash(candidate);
    if (accept) {
      current = candidate;
      current_fitness = f;
      neighbors = Neighbors(current, config);
    }
    RecordStep(trace, h, f, accept, current_fitness);
  }
  PadExhausted(trace, budget, current_fitness);
  trace.best = current;
  return trace;
}

SearchTrace GuidedHc(const SurrogateLandscape& landscape, const Metamodel& mm,
                     const GanSpec& start, int budget, Rng& rng) {
  if (budget < 1) throw ValidationError("budget must be >= 1");
  const GenotypeConfig& config = landscape.config().genotype;
  SearchTrace trace;
  GanSpec current = start;
  double current_fitness = landscape.Evaluate(start);
  trace.start_fitness = current_fitness;

  const Metamodel baseline = Metamodel::Uniform(mm.config());
  std::vector<GanSpec> neighbors;
  std::vector<std::size_t> ranking;
  std::size_t next = 0;
  auto rerank = [&] {
    neighbors = Neighbors(current, config);
    std::vector<ScoreResult> scores = ScoreBatch(mm, neighbors);
    std::vector<ScoreResult> chance = ScoreBatch(baseline, neighbors);
    for (std::size_t i = 0; i < scores.size(); ++i) {
      scores[i].normalized -= chance[i].normalized;
    }
    std::vector<std::uint64_t> tie(neighbors.size());
    for (auto& t : tie) t = rng();
    ranking.resize(neighbors.size());
    std::iota(ranking.begin(), ranking.end(), 0);
    std::sort(ranking.begin(), ranking.end(), [&](std::size_t a, std::size_t b) {
      if (scores[a].normalized != scores[b].normalized) {
        return scores[a].normalized > scores[b].normalized;
      }
      return tie[a] < tie[b];
    });
    next = 0;
  };
  rerank();
  while (static_cast<int>(trace.steps.size()) < budget) {
    if (next >= ranking.size()) break;
    const GanSpec& candidate = neighbors[ranking[next++]];
    double f = landscape.Evaluate(candidate);
    bool accept = f < current_fitness;
    std::uint64_t h = GenotypeHash(candidate);
    if (accept) {
      current = candidate;
      current_fitness = f;
    }
    RecordStep(trace, h, f, accept, current_fitness);
    if (accept) rerank();
  }
  PadExhausted(trace, budget, current_fitness);
  trace.best = current;
  return trace;
}

std::size_t Population::BestIndex() const {
  return static_cast<std::size_t>(
      std::min_element(fitness.begin(), fitness.end()) - fitness.begin());
}

const char* InitStrategyName(InitStrategy s) {
  switch (s) {
    case InitStrategy::kRandom:
      return "random";
    case InitStrategy::kFromFirst:
      return "from_first";
    case InitStrategy::kFromMetamodel:
      return "from_metamodel";
  }
  return "?";
}

InitStrategy ParseInitStrategy(const std::string& name) {
  if (name == "random") return InitStrategy::kRandom;
  if (name == "from_first") return InitStrategy::kFromFirst;
  if (name == "from_metamodel") return InitStrategy::kFromMetamodel;
  throw ValidationError("unknown init strategy '" + name + "'");
}

Population InitPopulation(InitStrategy strategy, int size,
                          const InitSource& source,
                          const SurrogateLandscape& landscape, Rng& rng) {
  if (size < 1) throw ValidationError("population size must be >= 1");
  const GenotypeConfig& config = landscape.config().genotype;
  if (strategy == InitStrategy::kFromFirst &&
      (source.elites == nullptr || source.elites->empty())) {
    throw ValidationError("from_first initialization needs a non-empty elite set");
  }
  if (strategy == InitStrategy::kFromMetamodel && source.metamodel == nullptr) {
    throw ValidationError("from_metamodel initialization needs a metamodel");
  }
  Population pop;
  for (int i = 0; i < size; ++i) {
    GanSpec g;
    switch (strategy) {
      case InitStrategy::kRandom:
        g = RandomGan(config, rng);
        break;
      case InitStrategy::kFromFirst:
        g = (*source.elites)[UniformIndex(rng, source.elites->size())].gan;
        break;
      case InitStrategy::kFromMetamodel:
        g = source.metamodel->Sample(rng);
        break;
    }
    pop.fitness.push_back(landscape.Evaluate(g));
    pop.members.push_back(std::move(g));
  }
  return pop;
}

Json EaConfig::ToJson() const {
  return Json{{"population", population},
              {"generations", generations},
              {"crossover_rate", crossover_rate},
              {"mutation_rate", mutation_rate},
              {"tournament", tournament},
              {"elitism", elitism}};
}

EaConfig EaConfig::FromJson(const Json& j) {
  EaConfig c;
  c.population = j.value("population", c.population);
  c.generations = j.value("generations", c.generations);
  c.crossover_rate = j.value("crossover_rate", c.crossover_rate);
  c.mutation_rate = j.value("mutation_rate", c.mutation_rate);
  c.tournament = j.value("tournament", c.tournament);
  c.elitism = j.value("elitism", c.elitism);
  return c;
}

std::vector<double> SimpleEa(const SurrogateLandscape& landscape,
                             Population init, const EaConfig& config, Rng& rng,
                             const GenerationCallback& on_generation) {
  if (config.generations < 1) throw ValidationError("generations must be >= 1");
  if (init.size() == 0) throw ValidationError("empty initial population");
  if (config.tournament < 1) throw ValidationError("tournament must be >= 1");
  const GenotypeConfig& gconf = landscape.config().genotype;
  const std::size_t size = init.size();
  const auto elitism =
      std::min<std::size_t>(static_cast<std::size_t>(std::max(config.elitism, 0)),
                            size);

  std::vector<double> best;
  Population pop = std::move(init);
  best.push_back(pop.fitness[pop.BestIndex()]);
  if (on_generation) on_generation(0, pop);

  auto select = [&]() -> std::size_t {
    std::size_t winner = UniformIndex(rng, size);
    for (int t = 1; t < config.tournament; ++t) {
      std::size_t c = UniformIndex(rng, size);
      if (pop.fitness[c] < pop.fitness[winner]) winner = c;
    }
    return winner;
  };

  for (int gen = 1; gen < config.generations; ++gen) {
    std::vector<std::size_t> order(size);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
      return pop.fitness[a] < pop.fitness[b];
    });
    Population next;
    for (std::size_t e = 0; e < elitism; ++e) {
      next.members.push_back(pop.members[order[e]]);
      next.fitness.push_back(pop.fitness[order[e]]);
    }
    while (next.size() < size) {
      const GanSpec& p1 = pop.members[select()];
      const GanSpec& p2 = pop.members[select()];
      std::pair<GanSpec, GanSpec> children =
          UniformUnit(rng) < config.crossover_rate ? Crossover(p1, p2)
                                                   : std::make_pair(p1, p2);
      for (GanSpec* child : {&children.first, &children.second}) {
        if (next.size() >= size) break;
        if (UniformUnit(rng) < config.mutation_rate) {
          *child = RandomMutation(*child, gconf, rng);
        }
        next.fitness.push_back(landscape.Evaluate(*child));
        next.members.push_back(std::move(*child));
      }
    }
    pop = std::move(next);
    best.push_back(pop.fitness[pop.BestIndex()]);
    if (on_generation) on_generation(gen, pop);
  }
  return best;
}

}  // namespace archsmith
