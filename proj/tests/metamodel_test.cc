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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <vector>

#include "archsmith/metamodel.h"
#include "doctest.h"
#include "testing.h"

namespace archsmith {
namespace {

using testing::AllGenotypes;
using testing::Tiny;

std::vector<Individual> Sampled(const GenotypeConfig& g, int count,
                                std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Individual> out;
  for (int i = 0; i < count; ++i) {
    GanSpec gan = RandomGan(g, rng);
    // Skew towards relu generators so the learned model is not flat.
    if (UniformUnit(rng) < 0.7) {
      for (LayerSpec& l : gan.generator.layers) l.activation = 0;
    }
    out.push_back({gan, 0.0, "r", "p"});
  }
  return out;
}

std::string Key(const GanSpec& gan) { return std::to_string(GenotypeHash(gan)); }

TEST_SUITE("metamodel") {

TEST_CASE("one submodel per depth in either mode") {
  MetamodelConfig joint;
  joint.genotype = GenotypeConfig::Joint();
  Metamodel a = Learn(Sampled(joint.genotype, 300, 1), joint);
  CHECK(a.submodels().size() == 12);
  CHECK(a.JointSubmodel({2, 3}).label == "2x3");

  MetamodelConfig per;
  per.genotype = GenotypeConfig::PerNetwork();
  Metamodel b = Learn(Sampled(per.genotype, 300, 2), per);
  CHECK(b.submodels().size() == 12);
  CHECK(b.NetworkSubmodel(Role::kDiscriminator, 6).label == "discriminator:6");
  CHECK_THROWS_AS(b.JointSubmodel({1, 1}), ValidationError);
  CHECK_THROWS_AS(a.NetworkSubmodel(Role::kGenerator, 1), ValidationError);
}

TEST_CASE("supermodel distributions sum to one") {
  for (Mode mode : {Mode::kJoint, Mode::kPerNetwork}) {
    MetamodelConfig c;
    c.genotype = mode == Mode::kJoint ? GenotypeConfig::Joint()
                                      : GenotypeConfig::PerNetwork();
    Metamodel m = Learn(Sampled(c.genotype, 100, 3), c);
    double total = 0.0;
    for (DepthKey k : c.genotype.DepthKeys()) {
      total += m.supermodel().Probability(k);
      CHECK(m.supermodel().Probability(k) > 0.0);
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("scores define a normalized distribution on a tiny space") {
  for (Mode mode : {Mode::kJoint, Mode::kPerNetwork}) {
    MetamodelConfig c;
    c.genotype = Tiny(mode, 2, 1);
    c.min_samples = 5;
    std::vector<GanSpec> all = AllGenotypes(c.genotype);
    CHECK(all.size() == 128 + 1024);
    for (const Metamodel& m :
         {Learn(Sampled(c.genotype, 200, 4), c), Metamodel::Uniform(c)}) {
      double total = 0.0;
      for (const ScoreResult& r : ScoreBatch(m, all)) total += std::exp(r.log_prob);
      CHECK(std::abs(total - 1.0) < 1e-6);
    }
  }
}

TEST_CASE("score decomposes into supermodel and submodel terms") {
  MetamodelConfig c;
  c.genotype = GenotypeConfig::Joint();
  Metamodel m = Learn(Sampled(c.genotype, 200, 5), c);
  Rng rng(6);
  for (int i = 0; i < 50; ++i) {
    GanSpec gan = RandomGan(c.genotype, rng);
    ScoreResult r = m.Score(gan);
    DepthKey key = DepthKeyOf(gan);
    CHECK(r.supermodel_term == doctest::Approx(m.supermodel().LogProb(key)));
    CHECK(r.log_prob == doctest::Approx(r.supermodel_term + r.submodel_term));
    CHECK(r.num_variables == 1 + 1 + 4 * (key.generator + key.discriminator));
    CHECK(r.normalized == doctest::Approx(r.log_prob / r.num_variables));
  }
}

TEST_CASE("uniform metamodel") {
  MetamodelConfig c;
  c.genotype = Tiny(Mode::kJoint, 1, 1);
  Metamodel u = Metamodel::Uniform(c);
  // 2 tf x (2 kinds x 2 acts x 1 init x 2 sizes)^2 = 128 equally likely.
  std::vector<GanSpec> all = AllGenotypes(c.genotype);
  for (const GanSpec& gan : all) {
    CHECK(u.Score(gan).log_prob == doctest::Approx(std::log(1.0 / 128)));
  }
}

TEST_CASE("learning recovers a planted chain") {
  MetamodelConfig c;
  c.genotype = GenotypeConfig::Joint();
  c.structure.algorithm = StructureAlgorithm::kChowLiu;
  const DepthKey key{1, 1};
  Schema schema = JointSchema(c.genotype, key);
  const int n = static_cast<int>(schema.size());
  Rng rng(7);
  std::vector<Individual> data;
  std::vector<std::vector<int>> rows;
  for (int i = 0; i < 5000; ++i) {
    std::vector<int> v(n);
    v[0] = static_cast<int>(UniformIndex(rng, schema[0].cardinality));
    for (int s = 1; s < n; ++s) {
      const int card = schema[s].cardinality;
      v[s] = UniformUnit(rng) < 0.7 ? v[s - 1] % card
                                    : static_cast<int>(UniformIndex(rng, card));
    }
    rows.push_back(v);
    data.push_back({UnflattenJoint(key, v, c.genotype), 0.0, "r", "p"});
  }
  Metamodel m = Learn(data, c);
  const BayesNet& bn = m.JointSubmodel(key).model;
  for (int s = 1; s < n; ++s) {
    REQUIRE(bn.dag().parents[s] == std::vector<int>{s - 1});
    const int card = schema[s].cardinality;
    std::vector<double> rows_seen(schema[s - 1].cardinality, 0.0);
    for (const auto& r : rows) rows_seen[r[s - 1]] += 1.0;
    double weighted = 0.0;
    for (int a = 0; a < schema[s - 1].cardinality; ++a) {
      double l1 = 0.0;
      for (int b = 0; b < card; ++b) {
        double truth = 0.3 / card + (b == a % card ? 0.7 : 0.0);
        l1 += std::abs(bn.Probability(s, a, b) - truth);
      }
      weighted += l1 * rows_seen[a] / rows.size();
    }
    CHECK(weighted < 0.05);
  }
}

TEST_CASE("save and load are exact") {
  MetamodelConfig c;
  c.genotype = GenotypeConfig::PerNetwork();
  Metamodel m = Learn(Sampled(c.genotype, 400, 8), c, Json{{"archive", "x"}});
  auto path = std::filesystem::temp_directory_path() / "archsmith_mm_test.json";
  SaveMetamodel(m, path.string());
  Metamodel back = LoadMetamodel(path.string());
  CHECK(back.provenance().at("archive") == "x");
  Rng rng(9);
  for (int i = 0; i < 100; ++i) {
    GanSpec gan = RandomGan(c.genotype, rng);
    CHECK(back.Score(gan).log_prob == m.Score(gan).log_prob);
  }

  std::string text;
  {
    std::ifstream in(path);
    text.assign(std::istreambuf_iterator<char>(in), {});
  }
  {
    std::ofstream out(path, std::ios::trunc);
    out << text.substr(0, text.size() / 2);
  }
  CHECK_THROWS_AS(LoadMetamodel(path.string()), ValidationError);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(LoadMetamodel(path.string()), IoError);

  Json wrong = MetamodelToJson(m);
  wrong["format"] = "mm-v0";
  CHECK_THROWS_AS(MetamodelFromJson(wrong), ValidationError);
}

TEST_CASE("provenance warning on config mismatch") {
  MetamodelConfig c;
  c.genotype = GenotypeConfig::Joint();
  Metamodel m = Learn(Sampled(c.genotype, 50, 10), c);
  CHECK_FALSE(ProvenanceWarning(m, c.genotype).has_value());
  GenotypeConfig other = c.genotype;
  other.size_bins = 7;
  CHECK(ProvenanceWarning(m, other).has_value());
}

TEST_CASE("out-of-range depths are rejected") {
  MetamodelConfig c;
  c.genotype = GenotypeConfig::Joint();
  Metamodel m = Metamodel::Uniform(c);
  Rng rng(11);
  GanSpec gan = RandomGan(c.genotype, rng);
  gan.generator.layers.resize(4, gan.generator.layers.front());
  CHECK_THROWS_WITH_AS(m.Score(gan), doctest::Contains("unsupported depth"),
                       ValidationError);
  CHECK_THROWS_AS(Learn(std::vector<Individual>{}, c), ValidationError);
  std::vector<Individual> bad = {{gan, 0.0, "r", "p"}};
  CHECK_THROWS_AS(Learn(bad, c), ValidationError);
}

TEST_CASE("sample frequencies match exp(score)") {
  MetamodelConfig c;
  c.genotype = Tiny(Mode::kJoint, 1, 1);
  c.min_samples = 5;
  Metamodel m = Learn(Sampled(c.genotype, 80, 12), c);
  std::vector<GanSpec> all = AllGenotypes(c.genotype);
  std::map<std::string, double> exact;
  for (const GanSpec& gan : all) exact[Key(gan)] = std::exp(m.Score(gan).log_prob);
  Rng rng(13);
  const int draws = 300000;
  std::map<std::string, double> seen;
  for (int i = 0; i < draws; ++i) seen[Key(m.Sample(rng))] += 1.0 / draws;
  double tv = 0.0;
  for (const auto& [k, p] : exact) tv += std::abs(seen[k] - p);
  CHECK(seen.size() == exact.size());
  CHECK(0.5 * tv < 0.02);
}

TEST_CASE("samples are valid genotypes in both modes") {
  for (Mode mode : {Mode::kJoint, Mode::kPerNetwork}) {
    MetamodelConfig c;
    c.genotype = mode == Mode::kJoint ? GenotypeConfig::Joint()
                                      : GenotypeConfig::PerNetwork();
    Metamodel m = Learn(Sampled(c.genotype, 300, 14), c);
    Rng rng(15);
    for (int i = 0; i < 1000; ++i) CHECK_NOTHROW(ValidateGan(m.Sample(rng), c.genotype));
  }
}

TEST_CASE("parallel scoring matches the serial reference") {
  MetamodelConfig c;
  c.genotype = GenotypeConfig::PerNetwork();
  Metamodel m = Learn(Sampled(c.genotype, 300, 16), c);
  Rng rng(17);
  std::vector<GanSpec> gans;
  for (int i = 0; i < 2000; ++i) gans.push_back(RandomGan(c.genotype, rng));
  std::vector<ScoreResult> par = ScoreBatch(m, gans);
  std::vector<ScoreResult> ser = ScoreBatchSerial(m, gans);
  REQUIRE(par.size() == ser.size());
  for (std::size_t i = 0; i < par.size(); ++i) {
    CHECK(par[i].log_prob == ser[i].log_prob);
    CHECK(par[i].normalized == ser[i].normalized);
  }
}

TEST_CASE("config json round-trip") {
  MetamodelConfig c;
  c.genotype = GenotypeConfig::PerNetwork();
  c.structure.algorithm = StructureAlgorithm::kChowLiu;
  c.alpha = 0.5;
  c.min_samples = 3;
  MetamodelConfig back = MetamodelConfig::FromJson(c.ToJson());
  CHECK(back.ToJson() == c.ToJson());
  CHECK(back.structure.algorithm == StructureAlgorithm::kChowLiu);
}

}  // TEST_SUITE

}  // namespace
}  // namespace archsmith
