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

// Architecture genotypes: layered generator/discriminator specs, their
// flattening into categorical attribute vectors, and quantile discretization
// of continuous attributes (neuron counts, training frequency).

#ifndef ARCHSMITH_GENOTYPE_H_
#define ARCHSMITH_GENOTYPE_H_

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "archsmith/common.h"
#include "json.hpp"

namespace archsmith {

using Json = nlohmann::json;

enum class Role { kGenerator, kDiscriminator };
enum class LayerKind { kDense, kConv, kTransposedConv };
enum class Mode { kJoint, kPerNetwork };

const char* RoleName(Role role);
const char* LayerKindName(LayerKind kind);
const char* ModeName(Mode mode);
Role ParseRole(const std::string& name);
LayerKind ParseLayerKind(const std::string& name);
Mode ParseMode(const std::string& name);

// Kinds a network of the given role may contain, in slot-value order.
// Convolution is discriminator-only, transposed convolution generator-only.
std::span<const LayerKind> LegalKinds(Role role);
bool IsLegalKind(Role role, LayerKind kind);

struct LayerSpec {
  LayerKind kind = LayerKind::kDense;
  int activation = 0;   // index into GenotypeConfig::activations
  int weight_init = 0;  // index into GenotypeConfig::weight_inits
  int size_bin = 0;     // discretized neuron / filter count
  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct DnnSpec {
  Role role = Role::kGenerator;
  std::vector<LayerSpec> layers;
  int depth() const { return static_cast<int>(layers.size()); }
  friend bool operator==(const DnnSpec&, const DnnSpec&) = default;
};

struct GanSpec {
  DnnSpec generator{Role::kGenerator, {}};
  DnnSpec discriminator{Role::kDiscriminator, {}};
  int train_freq_bin = 0;

  const DnnSpec& network(Role role) const {
    return role == Role::kGenerator ? generator : discriminator;
  }
  DnnSpec& network(Role role) {
    return role == Role::kGenerator ? generator : discriminator;
  }
  friend bool operator==(const GanSpec&, const GanSpec&) = default;
};

struct DepthKey {
  int generator = 1;
  int discriminator = 1;
  friend auto operator<=>(const DepthKey&, const DepthKey&) = default;
};

DepthKey DepthKeyOf(const GanSpec& gan);
std::string DepthKeyLabel(DepthKey key);

// Vocabularies and bounds. Everything that the schema depends on lives here.
struct GenotypeConfig {
  Mode mode = Mode::kJoint;
  int max_generator_depth = 3;
  int max_discriminator_depth = 4;
  int size_bins = 5;
  int train_freq_bins = 5;
  std::vector<std::string> activations = {"relu", "leaky_relu", "tanh",
                                          "sigmoid", "elu"};
  std::vector<std::string> weight_inits = {"xavier", "normal", "uniform"};

  // 3 x 4 depth keys, the MLP-GAN setting.
  static GenotypeConfig Joint();
  // Separate generator/discriminator submodels, up to 6 layers each.
  static GenotypeConfig PerNetwork();

  int MaxDepth(Role role) const {
    return role == Role::kGenerator ? max_generator_depth
                                    : max_discriminator_depth;
  }
  bool InBounds(DepthKey key) const;
  // Row-major over (generator, discriminator) depth.
  std::vector<DepthKey> DepthKeys() const;
  int NumDepthKeys() const {
    return max_generator_depth * max_discriminator_depth;
  }
  int DepthKeyIndex(DepthKey key) const;

  // Throws ValidationError on empty vocabularies or non-positive bounds.
  void Validate() const;
  std::uint64_t Hash() const;
  Json ToJson() const;
  static GenotypeConfig FromJson(const Json& j);
};

// Throws ValidationError("unsupported depth ...") or on any out-of-range
// attribute or role-illegal layer kind.
void ValidateGan(const GanSpec& gan, const GenotypeConfig& config);

// Stable across runs and platforms; depends only on the genotype values.
std::uint64_t GenotypeHash(const GanSpec& gan);

enum class LayerAttr { kKind = 0, kActivation = 1, kWeightInit = 2, kSizeBin = 3 };
inline constexpr int kSlotsPerLayer = 4;

struct SlotDescriptor {
  std::string name;
  int cardinality = 1;
  friend bool operator==(const SlotDescriptor&, const SlotDescriptor&) = default;
};

using Schema = std::vector<SlotDescriptor>;

int AttrCardinality(const GenotypeConfig& config, Role role, LayerAttr attr);

// Global slot first, then generator layers, then discriminator layers; four
// slots per layer in LayerAttr order. Kind slots hold the index into
// LegalKinds(role).
Schema JointSchema(const GenotypeConfig& config, DepthKey key);
// Per-network schema: the generator carries the global train-frequency slot
// ahead of its layers; the discriminator has layer slots only.
Schema NetworkSchema(const GenotypeConfig& config, Role role, int depth);

struct AttributeVector {
  DepthKey depth_key;
  std::optional<Role> role;  // set in per-network mode
  std::vector<int> values;
  Schema schema;
};

AttributeVector FlattenJoint(const GanSpec& gan, const GenotypeConfig& config);
AttributeVector FlattenNetwork(const GanSpec& gan, Role role,
                               const GenotypeConfig& config);
// One vector in joint mode, {generator, discriminator} in per-network mode.
std::vector<AttributeVector> Flatten(const GanSpec& gan,
                                     const GenotypeConfig& config);

GanSpec UnflattenJoint(DepthKey key, std::span<const int> values,
                       const GenotypeConfig& config);
GanSpec UnflattenNetworks(std::span<const int> generator_values,
                          int generator_depth,
                          std::span<const int> discriminator_values,
                          int discriminator_depth,
                          const GenotypeConfig& config);
GanSpec Unflatten(std::span<const AttributeVector> vectors,
                  const GenotypeConfig& config);

// Equal-frequency cut points for one continuous attribute.
struct DiscretizationScheme {
  std::vector<double> cuts;  // strictly ascending
  int arity() const { return static_cast<int>(cuts.size()) + 1; }
  friend bool operator==(const DiscretizationScheme&,
                         const DiscretizationScheme&) = default;
};

// Cut q sits at the midpoint of the order statistics around rank
// round(q * N / k). Cuts that separate no data collapse, lowering the arity.
DiscretizationScheme FitDiscretization(std::span<const double> values, int k);
// Number of cut points strictly below x.
int Discretize(double x, const DiscretizationScheme& scheme);

Json SchemeToJson(const DiscretizationScheme& scheme);
DiscretizationScheme SchemeFromJson(const Json& j);

// Schemes applied when records carry raw continuous values.
struct ContinuousSchemes {
  std::optional<DiscretizationScheme> layer_size;
  std::optional<DiscretizationScheme> train_freq;
};

// Genotype records: {"v":"v1","train_freq_bin":..,"generator":[..],
// "discriminator":[..]}; layers use vocabulary names.
Json GanToJson(const GanSpec& gan, const GenotypeConfig& config);
// Accepts raw "neurons" / "train_freq" in place of bins when schemes are
// provided.
GanSpec GanFromJson(const Json& j, const GenotypeConfig& config,
                    const ContinuousSchemes* schemes = nullptr);

// Uniform depth per role, then uniform legal attribute values.
GanSpec RandomGan(const GenotypeConfig& config, Rng& rng);
LayerSpec RandomLayer(const GenotypeConfig& config, Role role, Rng& rng);

}  // namespace archsmith

#endif  // ARCHSMITH_GENOTYPE_H_
