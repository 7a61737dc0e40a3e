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

#include "archsmith/metamodel.h"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace archsmith {

namespace {

struct Group {
  std::string label;
  std::optional<Role> role;
  DepthKey depth_key;
  int depth = 0;
  Schema schema;
  std::vector<std::vector<int>> rows;
};

std::vector<Variable> VariablesOf(const Schema& schema) {
  std::vector<Variable> vars;
  vars.reserve(schema.size());
  for (const SlotDescriptor& s : schema) vars.push_back({s.name, s.cardinality});
  return vars;
}

std::vector<int> CardinalitiesOf(const Schema& schema) {
  std::vector<int> cards;
  cards.reserve(schema.size());
  for (const SlotDescriptor& s : schema) cards.push_back(s.cardinality);
  return cards;
}

std::vector<Group> MakeGroups(const GenotypeConfig& g) {
  std::vector<Group> groups;
  if (g.mode == Mode::kJoint) {
    for (DepthKey key : g.DepthKeys()) {
      groups.push_back({DepthKeyLabel(key), std::nullopt, key, 0,
                        JointSchema(g, key), {}});
    }
  } else {
    for (Role role : {Role::kGenerator, Role::kDiscriminator}) {
      for (int d = 1; d <= g.MaxDepth(role); ++d) {
        groups.push_back({std::string(RoleName(role)) + ":" + std::to_string(d),
                          role, DepthKey{}, d, NetworkSchema(g, role, d), {}});
      }
    }
  }
  return groups;
}

Submodel LearnSubmodel(const Group& group, const MetamodelConfig& config) {
  Submodel sub;
  sub.label = group.label;
  sub.role = group.role;
  sub.depth_key = group.depth_key;
  sub.depth = group.depth;
  sub.schema = group.schema;
  sub.training_samples = group.rows.size();
  std::vector<Variable> vars = VariablesOf(group.schema);
  Dataset data = Dataset::FromRows(CardinalitiesOf(group.schema), group.rows);
  if (static_cast<int>(group.rows.size()) >= config.min_samples &&
      vars.size() >= 2) {
    std::vector<int> order(vars.size());
    std::iota(order.begin(), order.end(), 0);
    sub.model =
        LearnBayesNet(data, vars, order, config.structure, config.alpha);
    sub.structure_learned = true;
  } else {
    Dag edgeless{vars, std::vector<std::vector<int>>(vars.size())};
    sub.model = FitCpts(edgeless, data, config.alpha);
  }
  return sub;
}

Json SchemaToJson(const Schema& schema) {
  Json arr = Json::array();
  for (const SlotDescriptor& s : schema) {
    arr.push_back({{"name", s.name}, {"cardinality", s.cardinality}});
  }
  return arr;
}

}  // namespace

Json MetamodelConfig::ToJson() const {
  return Json{{"genotype", genotype.ToJson()},
              {"structure",
               {{"algorithm", StructureAlgorithmName(structure.algorithm)},
                {"mi_threshold", structure.mi_threshold},
                {"dpi_tolerance", structure.dpi_tolerance},
                {"bias_correction", structure.bias_correction}}},
              {"alpha", alpha},
              {"super_alpha", super_alpha},
              {"min_samples", min_samples}};
}

MetamodelConfig MetamodelConfig::FromJson(const Json& j) {
  MetamodelConfig c;
  if (j.contains("genotype")) {
    c.genotype = GenotypeConfig::FromJson(j.at("genotype"));
  }
  if (j.contains("structure")) {
    const Json& s = j.at("structure");
    if (s.contains("algorithm")) {
      c.structure.algorithm =
          ParseStructureAlgorithm(s.at("algorithm").get<std::string>());
    }
    c.structure.mi_threshold = s.value("mi_threshold", c.structure.mi_threshold);
    c.structure.dpi_tolerance =
        s.value("dpi_tolerance", c.structure.dpi_tolerance);
    c.structure.bias_correction =
        s.value("bias_correction", c.structure.bias_correction);
  }
  c.alpha = j.value("alpha", c.alpha);
  c.super_alpha = j.value("super_alpha", c.super_alpha);
  c.min_samples = j.value("min_samples", c.min_samples);
  c.parallel = j.value("parallel", c.parallel);
  return c;
}

Supermodel::Supermodel(const GenotypeConfig& config, std::vector<double> probs,
                       double alpha)
    : mode_(config.mode),
      max_generator_(config.max_generator_depth),
      max_discriminator_(config.max_discriminator_depth),
      probs_(std::move(probs)),
      alpha_(alpha) {
  const std::size_t expected =
      mode_ == Mode::kJoint
          ? static_cast<std::size_t>(config.NumDepthKeys())
          : static_cast<std::size_t>(max_generator_ + max_discriminator_);
  if (probs_.size() != expected) {
    throw ValidationError("supermodel size does not match depth bounds");
  }
  auto check = [](std::span<const double> p) {
    double s = 0.0;
    for (double x : p) {
      if (!(x >= 0.0)) throw ValidationError("negative supermodel probability");
      s += x;
    }
    if (std::abs(s - 1.0) > 1e-9) {
      throw ValidationError("supermodel probabilities do not sum to 1");
    }
  };
  if (mode_ == Mode::kJoint) {
    check(probs_);
  } else {
    std::span<const double> all(probs_);
    check(all.first(max_generator_));
    check(all.subspan(max_generator_));
  }
}

double Supermodel::Probability(DepthKey key) const {
  if (key.generator < 1 || key.generator > max_generator_ ||
      key.discriminator < 1 || key.discriminator > max_discriminator_) {
    throw ValidationError("unsupported depth " + DepthKeyLabel(key));
  }
  if (mode_ == Mode::kJoint) {
    return probs_[(key.generator - 1) * max_discriminator_ + key.discriminator -
                  1];
  }
  return probs_[key.generator - 1] *
         probs_[max_generator_ + key.discriminator - 1];
}

double Supermodel::LogProb(DepthKey key) const {
  if (mode_ == Mode::kJoint) return std::log(Probability(key));
  Probability(key);  // bounds check
  return std::log(probs_[key.generator - 1]) +
         std::log(probs_[max_generator_ + key.discriminator - 1]);
}

DepthKey Supermodel::Sample(Rng& rng) const {
  if (mode_ == Mode::kJoint) {
    auto idx = static_cast<int>(SampleCategorical(rng, probs_));
    return {idx / max_discriminator_ + 1, idx % max_discriminator_ + 1};
  }
  std::span<const double> all(probs_);
  int g = static_cast<int>(SampleCategorical(rng, all.first(max_generator_)));
  int d = static_cast<int>(
      SampleCategorical(rng, all.subspan(max_generator_)));
  return {g + 1, d + 1};
}

Metamodel::Metamodel(MetamodelConfig config, Supermodel supermodel,
                     std::vector<Submodel> submodels, Json provenance)
    : config_(std::move(config)),
      supermodel_(std::move(supermodel)),
      submodels_(std::move(submodels)),
      provenance_(std::move(provenance)) {
  const GenotypeConfig& g = config_.genotype;
  const std::size_t expected =
      g.mode == Mode::kJoint
          ? static_cast<std::size_t>(g.NumDepthKeys())
          : static_cast<std::size_t>(g.max_generator_depth +
                                     g.max_discriminator_depth);
  if (submodels_.size() != expected) {
    throw ValidationError("metamodel lacks a submodel for some depth");
  }
  for (const Submodel& s : submodels_) {
    const Dag& dag = s.model.dag();
    if (dag.size() != static_cast<int>(s.schema.size())) {
      throw ValidationError("submodel " + s.label + " does not match schema");
    }
    for (int v = 0; v < dag.size(); ++v) {
      if (dag.variables[v].name != s.schema[v].name ||
          dag.variables[v].cardinality != s.schema[v].cardinality) {
        throw ValidationError("submodel " + s.label +
                              " variable does not match schema");
      }
    }
  }
}

const Submodel& Metamodel::JointSubmodel(DepthKey key) const {
  if (mode() != Mode::kJoint) {
    throw ValidationError("joint submodel requested from per-network model");
  }
  return submodels_[config_.genotype.DepthKeyIndex(key)];
}

std::size_t Metamodel::NetworkIndex(Role role, int depth) const {
  const GenotypeConfig& g = config_.genotype;
  if (depth < 1 || depth > g.MaxDepth(role)) {
    throw ValidationError("unsupported depth " + std::to_string(depth) +
                          " for " + RoleName(role));
  }
  return role == Role::kGenerator
             ? static_cast<std::size_t>(depth - 1)
             : static_cast<std::size_t>(g.max_generator_depth + depth - 1);
}

const Submodel& Metamodel::NetworkSubmodel(Role role, int depth) const {
  if (mode() != Mode::kPerNetwork) {
    throw ValidationError("network submodel requested from joint model");
  }
  return submodels_[NetworkIndex(role, depth)];
}

ScoreResult Metamodel::Score(const GanSpec& gan) const {
  const GenotypeConfig& g = config_.genotype;
  ValidateGan(gan, g);
  ScoreResult r;
  DepthKey key = DepthKeyOf(gan);
  r.supermodel_term = supermodel_.LogProb(key);
  r.num_variables = supermodel_.NumVariables();
  if (mode() == Mode::kJoint) {
    AttributeVector v = FlattenJoint(gan, g);
    r.submodel_term = LogLikelihood(JointSubmodel(key).model, v.values);
    r.num_variables += static_cast<int>(v.values.size());
  } else {
    for (Role role : {Role::kGenerator, Role::kDiscriminator}) {
      AttributeVector v = FlattenNetwork(gan, role, g);
      r.submodel_term += LogLikelihood(
          NetworkSubmodel(role, gan.network(role).depth()).model, v.values);
      r.num_variables += static_cast<int>(v.values.size());
    }
  }
  r.log_prob = r.supermodel_term + r.submodel_term;
  r.normalized = r.log_prob / r.num_variables;
  return r;
}

GanSpec Metamodel::Sample(Rng& rng) const {
  const GenotypeConfig& g = config_.genotype;
  DepthKey key = supermodel_.Sample(rng);
  if (mode() == Mode::kJoint) {
    std::vector<int> values = PlsSample(JointSubmodel(key).model, rng);
    return UnflattenJoint(key, values, g);
  }
  std::vector<int> gv =
      PlsSample(NetworkSubmodel(Role::kGenerator, key.generator).model, rng);
  std::vector<int> dv = PlsSample(
      NetworkSubmodel(Role::kDiscriminator, key.discriminator).model, rng);
  return UnflattenNetworks(gv, key.generator, dv, key.discriminator, g);
}

Metamodel Metamodel::Uniform(const MetamodelConfig& config) {
  const GenotypeConfig& g = config.genotype;
  g.Validate();
  std::vector<Submodel> subs;
  for (const Group& group : MakeGroups(g)) {
    subs.push_back(LearnSubmodel(group, config));
  }
  std::vector<double> probs;
  if (g.mode == Mode::kJoint) {
    probs.assign(g.NumDepthKeys(), 1.0 / g.NumDepthKeys());
  } else {
    probs.assign(g.max_generator_depth, 1.0 / g.max_generator_depth);
    probs.insert(probs.end(), g.max_discriminator_depth,
                 1.0 / g.max_discriminator_depth);
  }
  return Metamodel(config, Supermodel(g, std::move(probs), config.super_alpha),
                   std::move(subs), Json{{"uniform", true}});
}

Metamodel Learn(std::span<const Individual> first_set,
                const MetamodelConfig& config, Json provenance) {
  if (first_set.empty()) throw ValidationError("empty training set");
  if (!(config.alpha > 0.0) || !(config.super_alpha > 0.0)) {
    throw ValidationError("smoothing pseudocounts must be > 0");
  }
  const GenotypeConfig& g = config.genotype;
  g.Validate();
  std::vector<Group> groups = MakeGroups(g);
  std::vector<double> counts(g.mode == Mode::kJoint
                                 ? g.NumDepthKeys()
                                 : g.max_generator_depth +
                                       g.max_discriminator_depth,
                             0.0);
  for (const Individual& ind : first_set) {
    DepthKey key = DepthKeyOf(ind.gan);
    if (g.mode == Mode::kJoint) {
      AttributeVector v = FlattenJoint(ind.gan, g);
      int idx = g.DepthKeyIndex(key);
      groups[idx].rows.push_back(std::move(v.values));
      counts[idx] += 1.0;
    } else {
      ValidateGan(ind.gan, g);
      for (Role role : {Role::kGenerator, Role::kDiscriminator}) {
        int d = ind.gan.network(role).depth();
        std::size_t idx = role == Role::kGenerator
                              ? static_cast<std::size_t>(d - 1)
                              : static_cast<std::size_t>(
                                    g.max_generator_depth + d - 1);
        groups[idx].rows.push_back(FlattenNetwork(ind.gan, role, g).values);
        counts[idx] += 1.0;
      }
    }
  }

  std::vector<Submodel> subs(groups.size());
  const auto num_groups = static_cast<std::int64_t>(groups.size());
#pragma omp parallel for schedule(dynamic) if (config.parallel)
  for (std::int64_t k = 0; k < num_groups; ++k) {
    subs[k] = LearnSubmodel(groups[k], config);
  }

  auto smooth = [&](std::span<const double> c) {
    double total = std::accumulate(c.begin(), c.end(), 0.0);
    std::vector<double> p;
    for (double x : c) {
      p.push_back((x + config.super_alpha) /
                  (total + config.super_alpha * static_cast<double>(c.size())));
    }
    return p;
  };
  std::vector<double> probs;
  if (g.mode == Mode::kJoint) {
    probs = smooth(counts);
  } else {
    std::span<const double> all(counts);
    probs = smooth(all.first(g.max_generator_depth));
    auto disc = smooth(all.subspan(g.max_generator_depth));
    probs.insert(probs.end(), disc.begin(), disc.end());
  }

  Json empty = Json::array();
  Json marginal_only = Json::array();
  for (const Submodel& s : subs) {
    if (s.training_samples == 0) {
      empty.push_back(s.label);
    } else if (!s.structure_learned) {
      marginal_only.push_back(s.label);
    }
  }
  if (!provenance.is_object()) provenance = Json::object();
  provenance["training_individuals"] = first_set.size();
  provenance["empty_submodels"] = std::move(empty);
  provenance["marginal_submodels"] = std::move(marginal_only);
  provenance["config_hash"] = HexDigest(g.Hash());
  return Metamodel(config, Supermodel(g, std::move(probs), config.super_alpha),
                   std::move(subs), std::move(provenance));
}

std::vector<ScoreResult> ScoreBatch(const Metamodel& m,
                                    std::span<const GanSpec> gans) {
  std::vector<ScoreResult> out(gans.size());
  const auto n = static_cast<std::int64_t>(gans.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) out[i] = m.Score(gans[i]);
  return out;
}

std::vector<ScoreResult> ScoreBatchSerial(const Metamodel& m,
                                          std::span<const GanSpec> gans) {
  std::vector<ScoreResult> out;
  out.reserve(gans.size());
  for (const GanSpec& g : gans) out.push_back(m.Score(g));
  return out;
}

Json MetamodelToJson(const Metamodel& m) {
  Json subs = Json::array();
  for (const Submodel& s : m.submodels()) {
    Json sj{{"label", s.label},
            {"training_samples", s.training_samples},
            {"structure_learned", s.structure_learned},
            {"schema", SchemaToJson(s.schema)},
            {"bn", BayesNetToJson(s.model)}};
    if (s.role) {
      sj["role"] = RoleName(*s.role);
      sj["depth"] = s.depth;
    } else {
      sj["depth_key"] = {s.depth_key.generator, s.depth_key.discriminator};
    }
    subs.push_back(std::move(sj));
  }
  const GenotypeConfig& g = m.genotype_config();
  return Json{{"format", "mm-v1"},
              {"mode", ModeName(g.mode)},
              {"bounds", {g.max_generator_depth, g.max_discriminator_depth}},
              {"config", m.config().ToJson()},
              {"provenance", m.provenance()},
              {"supermodel",
               {{"alpha", m.supermodel().alpha()},
                {"probabilities", m.supermodel().probabilities()}}},
              {"submodels", std::move(subs)}};
}

Metamodel MetamodelFromJson(const Json& j) {
  try {
    if (!j.is_object() || j.value("format", std::string()) != "mm-v1") {
      throw ValidationError("unsupported metamodel format (expected mm-v1)");
    }
    MetamodelConfig config = MetamodelConfig::FromJson(j.at("config"));
    const GenotypeConfig& g = config.genotype;
    if (j.at("mode").get<std::string>() != ModeName(g.mode)) {
      throw ValidationError("metamodel header mode disagrees with config");
    }
    Supermodel super(
        g, j.at("supermodel").at("probabilities").get<std::vector<double>>(),
        j.at("supermodel").at("alpha").get<double>());
    std::vector<Submodel> subs;
    for (const Json& sj : j.at("submodels")) {
      Submodel s;
      s.label = sj.at("label").get<std::string>();
      s.training_samples = sj.at("training_samples").get<std::size_t>();
      s.structure_learned = sj.at("structure_learned").get<bool>();
      for (const Json& slot : sj.at("schema")) {
        s.schema.push_back({slot.at("name").get<std::string>(),
                            slot.at("cardinality").get<int>()});
      }
      if (sj.contains("role")) {
        s.role = ParseRole(sj.at("role").get<std::string>());
        s.depth = sj.at("depth").get<int>();
      } else {
        s.depth_key = {sj.at("depth_key").at(0).get<int>(),
                       sj.at("depth_key").at(1).get<int>()};
      }
      s.model = BayesNetFromJson(sj.at("bn"));
      subs.push_back(std::move(s));
    }
    return Metamodel(std::move(config), std::move(super), std::move(subs),
                     j.at("provenance"));
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("corrupt metamodel: ") + e.what());
  }
}

void SaveMetamodel(const Metamodel& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << MetamodelToJson(m).dump() << '\n';
  if (!out) throw IoError("write failed for " + path);
}

Metamodel LoadMetamodel(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open metamodel " + path);
  Json j = Json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) {
    throw ValidationError("metamodel file " + path + " is corrupt or truncated");
  }
  return MetamodelFromJson(j);
}

std::optional<std::string> ProvenanceWarning(const Metamodel& m,
                                             const GenotypeConfig& other) {
  if (other.Hash() == m.genotype_config().Hash()) return std::nullopt;
  return "genotype config " + HexDigest(other.Hash()) +
         " differs from the metamodel's training config " +
         HexDigest(m.genotype_config().Hash());
}

}  // namespace archsmith
