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

#include "archsmith/landscape.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace archsmith {

namespace {

double UniformIn(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * UniformUnit(rng);
}

}  // namespace

Json LandscapeConfig::ToJson() const {
  return Json{{"genotype", genotype.ToJson()},
              {"family_seed", family_seed},
              {"jitter", jitter},
              {"pair_density", pair_density},
              {"depth_penalty", depth_penalty},
              {"noise", noise},
              {"margin", margin}};
}

LandscapeConfig LandscapeConfig::FromJson(const Json& j) {
  LandscapeConfig c;
  if (j.contains("genotype")) {
    c.genotype = GenotypeConfig::FromJson(j.at("genotype"));
  }
  c.family_seed = j.value("family_seed", c.family_seed);
  c.jitter = j.value("jitter", c.jitter);
  c.pair_density = j.value("pair_density", c.pair_density);
  c.depth_penalty = j.value("depth_penalty", c.depth_penalty);
  c.noise = j.value("noise", c.noise);
  c.margin = j.value("margin", c.margin);
  return c;
}

SurrogateLandscape::SurrogateLandscape(std::uint64_t seed,
                                       LandscapeConfig config)
    : seed_(seed), config_(std::move(config)) {
  const GenotypeConfig& g = config_.genotype;
  g.Validate();
  if (config_.margin <= 0.0 || config_.margin >= 1.0) {
    throw ValidationError("landscape margin must lie in (0, 1)");
  }
  if (config_.noise < 0.0 || config_.jitter < 0.0 || config_.jitter > 1.0 ||
      config_.pair_density < 0.0 || config_.depth_penalty < 0.0) {
    throw ValidationError("invalid landscape parameters");
  }

  cardinality_.push_back(g.train_freq_bins);
  for (Role role : {Role::kGenerator, Role::kDiscriminator}) {
    for (int i = 0; i < g.MaxDepth(role); ++i) {
      for (int a = 0; a < kSlotsPerLayer; ++a) {
        cardinality_.push_back(
            AttrCardinality(g, role, static_cast<LayerAttr>(a)));
      }
    }
  }
  const int n = num_positions();

  // Structure shared by the whole family.
  Rng family(Mix64(config_.family_seed));
  preferred_.generator = 1 + static_cast<int>(UniformIndex(
                                 family, g.max_generator_depth));
  preferred_.discriminator = 1 + static_cast<int>(UniformIndex(
                                     family, g.max_discriminator_depth));
  std::vector<int> family_planted(n);
  for (int p = 0; p < n; ++p) {
    family_planted[p] = static_cast<int>(UniformIndex(family, cardinality_[p]));
  }
  std::vector<std::pair<int, int>> all_pairs;
  for (int p = 0; p < n; ++p) {
    for (int q = p + 1; q < n; ++q) all_pairs.emplace_back(p, q);
  }
  std::shuffle(all_pairs.begin(), all_pairs.end(), family);
  auto num_pairs = std::min<std::size_t>(
      all_pairs.size(),
      static_cast<std::size_t>(std::lround(config_.pair_density * n)));
  all_pairs.resize(num_pairs);
  std::sort(all_pairs.begin(), all_pairs.end());
  for (auto [p, q] : all_pairs) {
    PlantedPair pair{p, q, {}, {}};
    for (int a = 0; a < cardinality_[p]; ++a) {
      pair.relation.push_back(
          static_cast<int>(UniformIndex(family, cardinality_[q])));
    }
    pairs_.push_back(std::move(pair));
  }

  // Per-instance variation.
  Rng instance(Mix64(seed ^ Mix64(config_.family_seed)));
  planted_ = family_planted;
  for (int p = 0; p < n; ++p) {
    bool redraw = UniformUnit(instance) < config_.jitter;
    int value = static_cast<int>(UniformIndex(instance, cardinality_[p]));
    if (redraw) planted_[p] = value;
  }
  unary_.resize(n);
  for (int p = 0; p < n; ++p) {
    for (int v = 0; v < cardinality_[p]; ++v) {
      double cost = UniformIn(instance, config_.margin, 1.0);
      unary_[p].push_back(v == planted_[p] ? 0.0 : cost);
    }
  }
  for (PlantedPair& pair : pairs_) {
    pair.relation[planted_[pair.first]] = planted_[pair.second];
    const int cq = cardinality_[pair.second];
    for (int a = 0; a < cardinality_[pair.first]; ++a) {
      for (int b = 0; b < cq; ++b) {
        double cost = UniformIn(instance, config_.margin, 1.0);
        pair.table.push_back(b == pair.relation[a] ? 0.0 : cost);
      }
    }
  }
  for (int k = 0; k < g.NumDepthKeys(); ++k) {
    base_offset_.push_back(UniformIn(instance, 0.0, config_.margin));
  }
}

int SurrogateLandscape::PositionOf(DepthKey key, int slot) const {
  if (slot == 0) return 0;
  const int gen_slots = key.generator * kSlotsPerLayer;
  if (slot <= gen_slots) return slot;
  return 1 + config_.genotype.max_generator_depth * kSlotsPerLayer +
         (slot - 1 - gen_slots);
}

double SurrogateLandscape::Base(DepthKey key) const {
  const GenotypeConfig& g = config_.genotype;
  int idx = g.DepthKeyIndex(key);
  int distance = std::abs(key.generator - preferred_.generator) +
                 std::abs(key.discriminator - preferred_.discriminator);
  return config_.depth_penalty * distance + base_offset_[idx];
}

double SurrogateLandscape::EvaluateNoiseless(const GanSpec& gan) const {
  AttributeVector v = FlattenJoint(gan, config_.genotype);
  std::vector<int> value_at(num_positions(), -1);
  double f = Base(v.depth_key);
  for (std::size_t s = 0; s < v.values.size(); ++s) {
    int pos = PositionOf(v.depth_key, static_cast<int>(s));
    value_at[pos] = v.values[s];
    f += unary_[pos][v.values[s]];
  }
  for (const PlantedPair& pair : pairs_) {
    int a = value_at[pair.first];
    int b = value_at[pair.second];
    if (a < 0 || b < 0) continue;
    f += pair.table[static_cast<std::size_t>(a) * cardinality_[pair.second] + b];
  }
  return f;
}

double SurrogateLandscape::Evaluate(const GanSpec& gan) const {
  double f = EvaluateNoiseless(gan);
  if (config_.noise > 0.0) {
    std::uint64_t h = Mix64(Mix64(seed_) ^ GenotypeHash(gan));
    double u = static_cast<double>(h >> 11) * 0x1.0p-53;
    f += config_.noise * u;
  }
  return f;
}

GanSpec SurrogateLandscape::Planted(DepthKey key) const {
  Schema schema = JointSchema(config_.genotype, key);
  std::vector<int> values(schema.size());
  for (std::size_t s = 0; s < schema.size(); ++s) {
    values[s] = planted_[PositionOf(key, static_cast<int>(s))];
  }
  return UnflattenJoint(key, values, config_.genotype);
}

SurrogateLandscape MakeLandscape(std::uint64_t seed,
                                 const LandscapeConfig& config) {
  return SurrogateLandscape(seed, config);
}

Json LandscapeToJson(const SurrogateLandscape& l) {
  Json pairs = Json::array();
  for (const PlantedPair& p : l.pairs()) {
    pairs.push_back({{"positions", {p.first, p.second}},
                     {"relation", p.relation},
                     {"table", p.table}});
  }
  std::vector<int> planted;
  std::vector<double> bases;
  for (int p = 0; p < l.num_positions(); ++p) {
    planted.push_back(l.PlantedValue(p));
  }
  for (DepthKey k : l.config().genotype.DepthKeys()) bases.push_back(l.Base(k));
  return Json{{"format", "land-v1"},
              {"seed", l.seed()},
              {"config", l.config().ToJson()},
              {"preferred_depth",
               {l.preferred_depth().generator,
                l.preferred_depth().discriminator}},
              {"planted", planted},
              {"base", bases},
              {"unary", l.unary()},
              {"pairs", std::move(pairs)}};
}

}  // namespace archsmith
