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

#include "archsmith/genotype.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

namespace archsmith {

namespace {

constexpr std::array<LayerKind, 2> kGeneratorKinds = {
    LayerKind::kDense, LayerKind::kTransposedConv};
constexpr std::array<LayerKind, 2> kDiscriminatorKinds = {LayerKind::kDense,
                                                          LayerKind::kConv};

constexpr const char* kAttrNames[kSlotsPerLayer] = {"kind", "activation",
                                                    "weight_init", "size_bin"};

int KindIndex(Role role, LayerKind kind) {
  auto kinds = LegalKinds(role);
  auto it = std::find(kinds.begin(), kinds.end(), kind);
  if (it == kinds.end()) {
    throw ValidationError(std::string(LayerKindName(kind)) +
                          " layer is illegal in a " + RoleName(role));
  }
  return static_cast<int>(it - kinds.begin());
}

int LayerValue(const LayerSpec& layer, Role role, LayerAttr attr) {
  switch (attr) {
    case LayerAttr::kKind:
      return KindIndex(role, layer.kind);
    case LayerAttr::kActivation:
      return layer.activation;
    case LayerAttr::kWeightInit:
      return layer.weight_init;
    case LayerAttr::kSizeBin:
      return layer.size_bin;
  }
  return 0;
}

void AppendLayerSlots(const GenotypeConfig& config, Role role, int depth,
                      Schema& schema) {
  const char* prefix = role == Role::kGenerator ? "g" : "d";
  for (int i = 0; i < depth; ++i) {
    for (int a = 0; a < kSlotsPerLayer; ++a) {
      auto attr = static_cast<LayerAttr>(a);
      schema.push_back({std::string(prefix) + std::to_string(i) + "." +
                            kAttrNames[a],
                        AttrCardinality(config, role, attr)});
    }
  }
}

void AppendLayerValues(const DnnSpec& net, std::vector<int>& out) {
  for (const LayerSpec& layer : net.layers) {
    for (int a = 0; a < kSlotsPerLayer; ++a) {
      out.push_back(LayerValue(layer, net.role, static_cast<LayerAttr>(a)));
    }
  }
}

DnnSpec ReadLayers(Role role, int depth, std::span<const int> values,
                   std::size_t offset) {
  DnnSpec net{role, {}};
  auto kinds = LegalKinds(role);
  for (int i = 0; i < depth; ++i) {
    std::size_t base = offset + static_cast<std::size_t>(i) * kSlotsPerLayer;
    int kind = values[base];
    if (kind < 0 || kind >= static_cast<int>(kinds.size())) {
      throw ValidationError("kind slot out of range");
    }
    net.layers.push_back({kinds[kind], values[base + 1], values[base + 2],
                          values[base + 3]});
  }
  return net;
}

void CheckValues(const Schema& schema, std::span<const int> values) {
  if (values.size() != schema.size()) {
    throw ValidationError("attribute vector has " +
                          std::to_string(values.size()) + " values, schema " +
                          std::to_string(schema.size()));
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] < 0 || values[i] >= schema[i].cardinality) {
      throw ValidationError("value out of range in slot " + schema[i].name);
    }
  }
}

int IndexOf(const std::vector<std::string>& vocab, const std::string& name,
            const char* what) {
  auto it = std::find(vocab.begin(), vocab.end(), name);
  if (it == vocab.end()) {
    throw ValidationError(std::string("unknown ") + what + " '" + name + "'");
  }
  return static_cast<int>(it - vocab.begin());
}

}  // namespace

std::string HexDigest(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(v));
  return buf;
}

const char* RoleName(Role role) {
  return role == Role::kGenerator ? "generator" : "discriminator";
}

const char* LayerKindName(LayerKind kind) {
  switch (kind) {
    case LayerKind::kDense:
      return "dense";
    case LayerKind::kConv:
      return "conv";
    case LayerKind::kTransposedConv:
      return "transposed_conv";
  }
  return "?";
}

const char* ModeName(Mode mode) {
  return mode == Mode::kJoint ? "joint" : "per_network";
}

Role ParseRole(const std::string& name) {
  if (name == "generator") return Role::kGenerator;
  if (name == "discriminator") return Role::kDiscriminator;
  throw ValidationError("unknown role '" + name + "'");
}

LayerKind ParseLayerKind(const std::string& name) {
  if (name == "dense") return LayerKind::kDense;
  if (name == "conv") return LayerKind::kConv;
  if (name == "transposed_conv") return LayerKind::kTransposedConv;
  throw ValidationError("unknown layer kind '" + name + "'");
}

Mode ParseMode(const std::string& name) {
  if (name == "joint") return Mode::kJoint;
  if (name == "per_network") return Mode::kPerNetwork;
  throw ValidationError("unknown mode '" + name + "'");
}

std::span<const LayerKind> LegalKinds(Role role) {
  if (role == Role::kGenerator) return kGeneratorKinds;
  return kDiscriminatorKinds;
}

bool IsLegalKind(Role role, LayerKind kind) {
  auto kinds = LegalKinds(role);
  return std::find(kinds.begin(), kinds.end(), kind) != kinds.end();
}

DepthKey DepthKeyOf(const GanSpec& gan) {
  return {gan.generator.depth(), gan.discriminator.depth()};
}

std::string DepthKeyLabel(DepthKey key) {
  return std::to_string(key.generator) + "x" +
         std::to_string(key.discriminator);
}

GenotypeConfig GenotypeConfig::Joint() { return GenotypeConfig{}; }

GenotypeConfig GenotypeConfig::PerNetwork() {
  GenotypeConfig c;
  c.mode = Mode::kPerNetwork;
  c.max_generator_depth = 6;
  c.max_discriminator_depth = 6;
  return c;
}

bool GenotypeConfig::InBounds(DepthKey key) const {
  return key.generator >= 1 && key.generator <= max_generator_depth &&
         key.discriminator >= 1 && key.discriminator <= max_discriminator_depth;
}

std::vector<DepthKey> GenotypeConfig::DepthKeys() const {
  std::vector<DepthKey> keys;
  for (int g = 1; g <= max_generator_depth; ++g) {
    for (int d = 1; d <= max_discriminator_depth; ++d) keys.push_back({g, d});
  }
  return keys;
}

int GenotypeConfig::DepthKeyIndex(DepthKey key) const {
  if (!InBounds(key)) {
    throw ValidationError("unsupported depth " + DepthKeyLabel(key));
  }
  return (key.generator - 1) * max_discriminator_depth + key.discriminator - 1;
}

void GenotypeConfig::Validate() const {
  if (max_generator_depth < 1 || max_discriminator_depth < 1) {
    throw ValidationError("depth bounds must be at least 1");
  }
  if (size_bins < 1 || train_freq_bins < 1 || activations.empty() ||
      weight_inits.empty()) {
    throw ValidationError("empty vocabulary in genotype config");
  }
}

std::uint64_t GenotypeConfig::Hash() const {
  Fnv1a h;
  h.Add(ToJson().dump());
  return h.Digest();
}

Json GenotypeConfig::ToJson() const {
  return Json{{"mode", ModeName(mode)},
              {"max_generator_depth", max_generator_depth},
              {"max_discriminator_depth", max_discriminator_depth},
              {"size_bins", size_bins},
              {"train_freq_bins", train_freq_bins},
              {"activations", activations},
              {"weight_inits", weight_inits}};
}

GenotypeConfig GenotypeConfig::FromJson(const Json& j) {
  GenotypeConfig c;
  if (j.contains("mode")) {
    c.mode = ParseMode(j.at("mode").get<std::string>());
    if (c.mode == Mode::kPerNetwork) c = PerNetwork();
  }
  c.max_generator_depth = j.value("max_generator_depth", c.max_generator_depth);
  c.max_discriminator_depth =
      j.value("max_discriminator_depth", c.max_discriminator_depth);
  c.size_bins = j.value("size_bins", c.size_bins);
  c.train_freq_bins = j.value("train_freq_bins", c.train_freq_bins);
  c.activations = j.value("activations", c.activations);
  c.weight_inits = j.value("weight_inits", c.weight_inits);
  c.Validate();
  return c;
}

void ValidateGan(const GanSpec& gan, const GenotypeConfig& config) {
  if (gan.generator.role != Role::kGenerator ||
      gan.discriminator.role != Role::kDiscriminator) {
    throw ValidationError("network roles swapped");
  }
  if (!config.InBounds(DepthKeyOf(gan))) {
    throw ValidationError("unsupported depth " +
                          DepthKeyLabel(DepthKeyOf(gan)));
  }
  if (gan.train_freq_bin < 0 || gan.train_freq_bin >= config.train_freq_bins) {
    throw ValidationError("train_freq_bin out of range");
  }
  for (Role role : {Role::kGenerator, Role::kDiscriminator}) {
    for (const LayerSpec& layer : gan.network(role).layers) {
      if (!IsLegalKind(role, layer.kind)) {
        throw ValidationError(std::string(LayerKindName(layer.kind)) +
                              " layer is illegal in a " + RoleName(role));
      }
      if (layer.activation < 0 ||
          layer.activation >= static_cast<int>(config.activations.size()) ||
          layer.weight_init < 0 ||
          layer.weight_init >= static_cast<int>(config.weight_inits.size()) ||
          layer.size_bin < 0 || layer.size_bin >= config.size_bins) {
        throw ValidationError("layer attribute out of range");
      }
    }
  }
}

std::uint64_t GenotypeHash(const GanSpec& gan) {
  Fnv1a h;
  h.Add(static_cast<std::uint64_t>(gan.train_freq_bin));
  for (Role role : {Role::kGenerator, Role::kDiscriminator}) {
    const DnnSpec& net = gan.network(role);
    h.Add(static_cast<std::uint64_t>(net.depth()));
    for (const LayerSpec& l : net.layers) {
      h.Add(static_cast<std::uint64_t>(l.kind));
      h.Add(static_cast<std::uint64_t>(l.activation));
      h.Add(static_cast<std::uint64_t>(l.weight_init));
      h.Add(static_cast<std::uint64_t>(l.size_bin));
    }
  }
  return h.Digest();
}

int AttrCardinality(const GenotypeConfig& config, Role role, LayerAttr attr) {
  switch (attr) {
    case LayerAttr::kKind:
      return static_cast<int>(LegalKinds(role).size());
    case LayerAttr::kActivation:
      return static_cast<int>(config.activations.size());
    case LayerAttr::kWeightInit:
      return static_cast<int>(config.weight_inits.size());
    case LayerAttr::kSizeBin:
      return config.size_bins;
  }
  return 1;
}

Schema JointSchema(const GenotypeConfig& config, DepthKey key) {
  if (!config.InBounds(key)) {
    throw ValidationError("unsupported depth " + DepthKeyLabel(key));
  }
  Schema schema;
  schema.push_back({"train_freq_bin", config.train_freq_bins});
  AppendLayerSlots(config, Role::kGenerator, key.generator, schema);
  AppendLayerSlots(config, Role::kDiscriminator, key.discriminator, schema);
  return schema;
}

Schema NetworkSchema(const GenotypeConfig& config, Role role, int depth) {
  if (depth < 1 || depth > config.MaxDepth(role)) {
    throw ValidationError("unsupported depth " + std::to_string(depth) +
                          " for " + RoleName(role));
  }
  Schema schema;
  if (role == Role::kGenerator) {
    schema.push_back({"train_freq_bin", config.train_freq_bins});
  }
  AppendLayerSlots(config, role, depth, schema);
  return schema;
}

AttributeVector FlattenJoint(const GanSpec& gan, const GenotypeConfig& config) {
  ValidateGan(gan, config);
  AttributeVector v;
  v.depth_key = DepthKeyOf(gan);
  v.schema = JointSchema(config, v.depth_key);
  v.values.reserve(v.schema.size());
  v.values.push_back(gan.train_freq_bin);
  AppendLayerValues(gan.generator, v.values);
  AppendLayerValues(gan.discriminator, v.values);
  return v;
}

AttributeVector FlattenNetwork(const GanSpec& gan, Role role,
                               const GenotypeConfig& config) {
  ValidateGan(gan, config);
  AttributeVector v;
  v.depth_key = DepthKeyOf(gan);
  v.role = role;
  v.schema = NetworkSchema(config, role, gan.network(role).depth());
  if (role == Role::kGenerator) v.values.push_back(gan.train_freq_bin);
  AppendLayerValues(gan.network(role), v.values);
  return v;
}

std::vector<AttributeVector> Flatten(const GanSpec& gan,
                                     const GenotypeConfig& config) {
  if (config.mode == Mode::kJoint) return {FlattenJoint(gan, config)};
  return {FlattenNetwork(gan, Role::kGenerator, config),
          FlattenNetwork(gan, Role::kDiscriminator, config)};
}

GanSpec UnflattenJoint(DepthKey key, std::span<const int> values,
                       const GenotypeConfig& config) {
  CheckValues(JointSchema(config, key), values);
  GanSpec gan;
  gan.train_freq_bin = values[0];
  gan.generator = ReadLayers(Role::kGenerator, key.generator, values, 1);
  gan.discriminator =
      ReadLayers(Role::kDiscriminator, key.discriminator, values,
                 1 + static_cast<std::size_t>(key.generator) * kSlotsPerLayer);
  return gan;
}

GanSpec UnflattenNetworks(std::span<const int> generator_values,
                          int generator_depth,
                          std::span<const int> discriminator_values,
                          int discriminator_depth,
                          const GenotypeConfig& config) {
  CheckValues(NetworkSchema(config, Role::kGenerator, generator_depth),
              generator_values);
  CheckValues(NetworkSchema(config, Role::kDiscriminator, discriminator_depth),
              discriminator_values);
  GanSpec gan;
  gan.train_freq_bin = generator_values[0];
  gan.generator =
      ReadLayers(Role::kGenerator, generator_depth, generator_values, 1);
  gan.discriminator = ReadLayers(Role::kDiscriminator, discriminator_depth,
                                 discriminator_values, 0);
  return gan;
}

GanSpec Unflatten(std::span<const AttributeVector> vectors,
                  const GenotypeConfig& config) {
  if (config.mode == Mode::kJoint) {
    if (vectors.size() != 1) {
      throw ValidationError("joint mode expects one attribute vector");
    }
    return UnflattenJoint(vectors[0].depth_key, vectors[0].values, config);
  }
  if (vectors.size() != 2) {
    throw ValidationError("per-network mode expects two attribute vectors");
  }
  return UnflattenNetworks(vectors[0].values, vectors[0].depth_key.generator,
                           vectors[1].values,
                           vectors[1].depth_key.discriminator, config);
}

DiscretizationScheme FitDiscretization(std::span<const double> values, int k) {
  if (values.empty()) throw ValidationError("no data");
  if (k < 2) throw ValidationError("discretization arity must be >= 2");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  DiscretizationScheme scheme;
  for (int q = 1; q < k; ++q) {
    double pos = static_cast<double>(q) * static_cast<double>(n) / k;
    auto b = static_cast<std::size_t>(std::floor(pos + 0.5));
    b = std::clamp<std::size_t>(b, 1, n > 1 ? n - 1 : 1);
    if (b >= n || !(sorted[b - 1] < sorted[b])) continue;
    double cut = 0.5 * (sorted[b - 1] + sorted[b]);
    if (scheme.cuts.empty() || scheme.cuts.back() < cut) {
      scheme.cuts.push_back(cut);
    }
  }
  return scheme;
}

int Discretize(double x, const DiscretizationScheme& scheme) {
  return static_cast<int>(
      std::lower_bound(scheme.cuts.begin(), scheme.cuts.end(), x) -
      scheme.cuts.begin());
}

Json SchemeToJson(const DiscretizationScheme& scheme) {
  return Json{{"cuts", scheme.cuts}};
}

DiscretizationScheme SchemeFromJson(const Json& j) {
  DiscretizationScheme s{j.at("cuts").get<std::vector<double>>()};
  for (std::size_t i = 1; i < s.cuts.size(); ++i) {
    if (!(s.cuts[i - 1] < s.cuts[i])) {
      throw ValidationError("discretization cuts not strictly ascending");
    }
  }
  return s;
}

Json GanToJson(const GanSpec& gan, const GenotypeConfig& config) {
  auto layers = [&](const DnnSpec& net) {
    Json arr = Json::array();
    for (const LayerSpec& l : net.layers) {
      arr.push_back({{"kind", LayerKindName(l.kind)},
                     {"activation", config.activations.at(l.activation)},
                     {"weight_init", config.weight_inits.at(l.weight_init)},
                     {"size_bin", l.size_bin}});
    }
    return arr;
  };
  return Json{{"v", "v1"},
              {"train_freq_bin", gan.train_freq_bin},
              {"generator", layers(gan.generator)},
              {"discriminator", layers(gan.discriminator)}};
}

GanSpec GanFromJson(const Json& j, const GenotypeConfig& config,
                    const ContinuousSchemes* schemes) {
  if (!j.is_object()) throw ValidationError("genotype is not an object");
  if (j.value("v", std::string("v1")) != "v1") {
    throw ValidationError("unsupported genotype version");
  }
  GanSpec gan;
  if (j.contains("train_freq_bin")) {
    gan.train_freq_bin = j.at("train_freq_bin").get<int>();
  } else if (j.contains("train_freq") && schemes && schemes->train_freq) {
    gan.train_freq_bin =
        Discretize(j.at("train_freq").get<double>(), *schemes->train_freq);
  } else {
    throw ValidationError("genotype lacks train_freq_bin");
  }
  for (Role role : {Role::kGenerator, Role::kDiscriminator}) {
    DnnSpec& net = gan.network(role);
    net.role = role;
    for (const Json& lj : j.at(RoleName(role))) {
      LayerSpec l;
      l.kind = ParseLayerKind(lj.at("kind").get<std::string>());
      l.activation = IndexOf(config.activations,
                             lj.at("activation").get<std::string>(),
                             "activation");
      l.weight_init = IndexOf(config.weight_inits,
                              lj.at("weight_init").get<std::string>(),
                              "weight init");
      if (lj.contains("size_bin")) {
        l.size_bin = lj.at("size_bin").get<int>();
      } else if (lj.contains("neurons") && schemes && schemes->layer_size) {
        l.size_bin =
            Discretize(lj.at("neurons").get<double>(), *schemes->layer_size);
      } else {
        throw ValidationError("layer lacks size_bin");
      }
      net.layers.push_back(l);
    }
  }
  ValidateGan(gan, config);
  return gan;
}

LayerSpec RandomLayer(const GenotypeConfig& config, Role role, Rng& rng) {
  auto kinds = LegalKinds(role);
  LayerSpec l;
  l.kind = kinds[UniformIndex(rng, kinds.size())];
  l.activation = static_cast<int>(UniformIndex(rng, config.activations.size()));
  l.weight_init =
      static_cast<int>(UniformIndex(rng, config.weight_inits.size()));
  l.size_bin = static_cast<int>(
      UniformIndex(rng, static_cast<std::size_t>(config.size_bins)));
  return l;
}

GanSpec RandomGan(const GenotypeConfig& config, Rng& rng) {
  GanSpec gan;
  gan.train_freq_bin = static_cast<int>(
      UniformIndex(rng, static_cast<std::size_t>(config.train_freq_bins)));
  for (Role role : {Role::kGenerator, Role::kDiscriminator}) {
    auto depth = 1 + UniformIndex(rng, config.MaxDepth(role));
    for (std::size_t i = 0; i < depth; ++i) {
      gan.network(role).layers.push_back(RandomLayer(config, role, rng));
    }
  }
  return gan;
}

}  // namespace archsmith
