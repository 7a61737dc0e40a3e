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

// Seeded synthetic fitness over genotypes, standing in for training a GAN
// and measuring its quality. Lower is better.
//
// Tables are defined over "positions": the global slot plus every layer slot
// up to the maximum depth of each role. A genotype activates the positions
// its depths cover. Fitness is
//
//   base(depth key) + sum of unary[pos][value]
//                   + sum over active planted pairs of pair[p,q][a][b]
//                   + noise * U(seed, genotype hash)
//
// Every unary table is 0 at the planted value and >= margin elsewhere; every
// pair table is 0 where b = relation(a) (which holds at the planted values)
// and >= margin elsewhere. The planted pattern is therefore the unique
// noise-free argmin of each depth key, with fitness base(key).
//
// Landscapes built from the same family seed share planted values, pairs and
// relations, except for a `jitter` fraction of positions redrawn per instance
// seed; table magnitudes are drawn per instance. That shared structure is what
// lets a model learned on some instances transfer to others.

#ifndef ARCHSMITH_LANDSCAPE_H_
#define ARCHSMITH_LANDSCAPE_H_

#include <cstdint>
#include <vector>

#include "archsmith/genotype.h"

namespace archsmith {

struct LandscapeConfig {
  GenotypeConfig genotype;
  std::uint64_t family_seed = 5;
  double jitter = 0.2;        // fraction of planted values redrawn per seed
  double pair_density = 0.5;  // planted pairs per position
  double depth_penalty = 1.0; // base cost per layer away from preferred depth
  double noise = 0.05;        // amplitude of the hash-keyed noise term
  double margin = 0.1;        // minimum cost of any non-planted entry

  Json ToJson() const;
  static LandscapeConfig FromJson(const Json& j);
};

struct PlantedPair {
  int first = 0;   // position
  int second = 0;  // position, > first
  std::vector<int> relation;  // relation[a] = zero-cost partner value
  std::vector<double> table;  // [a * card(second) + b]
};

class SurrogateLandscape {
 public:
  SurrogateLandscape() = default;
  SurrogateLandscape(std::uint64_t seed, LandscapeConfig config);

  std::uint64_t seed() const { return seed_; }
  const LandscapeConfig& config() const { return config_; }
  int num_positions() const { return static_cast<int>(cardinality_.size()); }
  const std::vector<PlantedPair>& pairs() const { return pairs_; }
  const std::vector<std::vector<double>>& unary() const { return unary_; }
  DepthKey preferred_depth() const { return preferred_; }

  // Throws ValidationError for out-of-bounds depths.
  double Evaluate(const GanSpec& gan) const;
  double EvaluateNoiseless(const GanSpec& gan) const;
  double Base(DepthKey key) const;
  GanSpec Planted(DepthKey key) const;
  int PlantedValue(int position) const { return planted_[position]; }

  // Position of joint-schema slot `slot` for the given depth key.
  int PositionOf(DepthKey key, int slot) const;

 private:
  std::uint64_t seed_ = 0;
  LandscapeConfig config_;
  DepthKey preferred_;
  std::vector<int> cardinality_;
  std::vector<int> planted_;
  std::vector<std::vector<double>> unary_;
  std::vector<PlantedPair> pairs_;
  std::vector<double> base_offset_;  // per depth key
};

SurrogateLandscape MakeLandscape(std::uint64_t seed,
                                 const LandscapeConfig& config);

// "land-v1" document: seed, config, planted values and all tables.
Json LandscapeToJson(const SurrogateLandscape& l);

}  // namespace archsmith

#endif  // ARCHSMITH_LANDSCAPE_H_
