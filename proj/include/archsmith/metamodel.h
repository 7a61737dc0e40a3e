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

// Two-level model of good architectures.
//
// The supermodel is a smoothed categorical distribution over network depths:
// one variable over (generator, discriminator) depth pairs in joint mode, or
// one variable per role in per-network mode. Each depth (pair) owns a
// Bayesian-network submodel over the attribute slots that exist at that
// depth. A genotype's log-probability is the sum of the supermodel term(s)
// and the submodel log-likelihood(s) of its flattened attribute vector(s).

#ifndef ARCHSMITH_METAMODEL_H_
#define ARCHSMITH_METAMODEL_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "archsmith/archive.h"
#include "archsmith/bayesnet.h"
#include "archsmith/genotype.h"

namespace archsmith {

struct MetamodelConfig {
  GenotypeConfig genotype;
  StructureOptions structure;
  double alpha = 1.0;        // CPT pseudocount, must be > 0
  double super_alpha = 1.0;  // pseudocount per supported depth
  int min_samples = 10;      // below this a submodel is independent marginals
  bool parallel = true;      // learn submodels concurrently

  Json ToJson() const;
  static MetamodelConfig FromJson(const Json& j);
};

class Supermodel {
 public:
  Supermodel() = default;
  // Joint mode: `probs` over GenotypeConfig::DepthKeys(). Per-network mode:
  // `probs` over generator depths 1..G followed by discriminator depths 1..D.
  Supermodel(const GenotypeConfig& config, std::vector<double> probs,
             double alpha);

  double LogProb(DepthKey key) const;
  DepthKey Sample(Rng& rng) const;
  // Number of supermodel variables: 1 in joint mode, 2 per-network.
  int NumVariables() const { return mode_ == Mode::kJoint ? 1 : 2; }
  double Probability(DepthKey key) const;
  const std::vector<double>& probabilities() const { return probs_; }
  double alpha() const { return alpha_; }

 private:
  Mode mode_ = Mode::kJoint;
  int max_generator_ = 1;
  int max_discriminator_ = 1;
  std::vector<double> probs_;
  double alpha_ = 1.0;
};

struct Submodel {
  std::string label;           // "2x3" or "generator:4"
  std::optional<Role> role;    // per-network mode only
  DepthKey depth_key;          // joint mode key
  int depth = 0;               // per-network mode depth
  Schema schema;
  BayesNet model;
  bool structure_learned = false;  // false: independent marginals
  std::size_t training_samples = 0;
};

struct ScoreResult {
  double log_prob = 0.0;
  double normalized = 0.0;  // log_prob / num_variables
  double supermodel_term = 0.0;
  double submodel_term = 0.0;
  int num_variables = 0;    // supermodel variables + schema slots
};

class Metamodel {
 public:
  Metamodel() = default;
  Metamodel(MetamodelConfig config, Supermodel supermodel,
            std::vector<Submodel> submodels, Json provenance);

  const MetamodelConfig& config() const { return config_; }
  const GenotypeConfig& genotype_config() const { return config_.genotype; }
  Mode mode() const { return config_.genotype.mode; }
  const Supermodel& supermodel() const { return supermodel_; }
  const std::vector<Submodel>& submodels() const { return submodels_; }
  const Json& provenance() const { return provenance_; }

  const Submodel& JointSubmodel(DepthKey key) const;
  const Submodel& NetworkSubmodel(Role role, int depth) const;

  // Throws ValidationError("unsupported depth ...") out of bounds.
  ScoreResult Score(const GanSpec& gan) const;
  GanSpec Sample(Rng& rng) const;

  // Every depth equally likely and every submodel uniform.
  static Metamodel Uniform(const MetamodelConfig& config);

 private:
  std::size_t NetworkIndex(Role role, int depth) const;

  MetamodelConfig config_;
  Supermodel supermodel_;
  std::vector<Submodel> submodels_;
  Json provenance_;
};

// Groups the elite set by depth key (or role and depth), learns one submodel
// per group and a smoothed supermodel over all supported depths. Throws
// ValidationError on an empty set or out-of-bounds depths.
Metamodel Learn(std::span<const Individual> first_set,
                const MetamodelConfig& config, Json provenance = Json::object());

// Scores many genotypes; OpenMP-parallel over the batch.
std::vector<ScoreResult> ScoreBatch(const Metamodel& m,
                                    std::span<const GanSpec> gans);
// Single-threaded reference for ScoreBatch.
std::vector<ScoreResult> ScoreBatchSerial(const Metamodel& m,
                                          std::span<const GanSpec> gans);

// "mm-v1" document with one embedded "bn-v1" document per submodel.
Json MetamodelToJson(const Metamodel& m);
Metamodel MetamodelFromJson(const Json& j);
void SaveMetamodel(const Metamodel& m, const std::string& path);
// Throws ValidationError on version mismatch or a truncated/corrupt file.
Metamodel LoadMetamodel(const std::string& path);

// Non-empty when genotypes produced under `other` are being scored by a model
// learned under a different genotype configuration.
std::optional<std::string> ProvenanceWarning(const Metamodel& m,
                                             const GenotypeConfig& other);

}  // namespace archsmith

#endif  // ARCHSMITH_METAMODEL_H_
