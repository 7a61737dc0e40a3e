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
#include <vector>

#include "archsmith/landscape.h"
#include "doctest.h"
#include "testing.h"

namespace archsmith {
namespace {

LandscapeConfig Config(Mode mode) {
  LandscapeConfig c;
  c.genotype = mode == Mode::kJoint ? GenotypeConfig::Joint()
                                    : GenotypeConfig::PerNetwork();
  return c;
}

double Correlation(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

TEST_SUITE("landscape") {

TEST_CASE("evaluation is a deterministic function of seed and genotype") {
  LandscapeConfig c = Config(Mode::kJoint);
  SurrogateLandscape a(7, c), b(7, c), other(8, c);
  Rng rng(1);
  int differing = 0;
  for (int i = 0; i < 200; ++i) {
    GanSpec gan = RandomGan(c.genotype, rng);
    CHECK(a.Evaluate(gan) == b.Evaluate(gan));
    differing += a.Evaluate(gan) != other.Evaluate(gan);
  }
  CHECK(differing > 190);
  CHECK(LandscapeToJson(a) == LandscapeToJson(b));
}

TEST_CASE("noise is bounded by its amplitude") {
  LandscapeConfig c = Config(Mode::kPerNetwork);
  SurrogateLandscape l(3, c);
  Rng rng(2);
  for (int i = 0; i < 500; ++i) {
    GanSpec gan = RandomGan(c.genotype, rng);
    double d = l.Evaluate(gan) - l.EvaluateNoiseless(gan);
    CHECK(d >= 0.0);
    CHECK(d < c.noise);
  }
  c.noise = 0.0;
  SurrogateLandscape quiet(3, c);
  GanSpec gan = RandomGan(c.genotype, rng);
  CHECK(quiet.Evaluate(gan) == quiet.EvaluateNoiseless(gan));
}

TEST_CASE("planted genotype scores its depth base") {
  for (Mode mode : {Mode::kJoint, Mode::kPerNetwork}) {
    LandscapeConfig c = Config(mode);
    SurrogateLandscape l(11, c);
    for (DepthKey k : c.genotype.DepthKeys()) {
      GanSpec planted = l.Planted(k);
      CHECK(DepthKeyOf(planted) == k);
      CHECK(l.EvaluateNoiseless(planted) == doctest::Approx(l.Base(k)));
    }
  }
}

TEST_CASE("planted genotype is the argmin of each depth on a tiny space") {
  LandscapeConfig c;
  c.genotype = testing::Tiny(Mode::kJoint, 2, 2);
  c.noise = 0.0;
  for (std::uint64_t seed : {1, 2, 3}) {
    SurrogateLandscape l(seed, c);
    std::vector<GanSpec> all = testing::AllGenotypes(c.genotype);
    for (DepthKey k : c.genotype.DepthKeys()) {
      GanSpec planted = l.Planted(k);
      double best = l.Evaluate(planted);
      for (const GanSpec& gan : all) {
        if (DepthKeyOf(gan) != k || gan == planted) continue;
        CHECK(l.Evaluate(gan) > best);
      }
    }
  }
}

TEST_CASE("moving any slot off its planted value costs at least the margin") {
  LandscapeConfig c = Config(Mode::kJoint);
  c.noise = 0.0;
  SurrogateLandscape l(4, c);
  for (DepthKey k : c.genotype.DepthKeys()) {
    GanSpec planted = l.Planted(k);
    AttributeVector v = FlattenJoint(planted, c.genotype);
    Schema schema = JointSchema(c.genotype, k);
    for (std::size_t s = 0; s < v.values.size(); ++s) {
      std::vector<int> flipped = v.values;
      flipped[s] = (flipped[s] + 1) % schema[s].cardinality;
      if (flipped[s] == v.values[s]) continue;
      GanSpec gan = UnflattenJoint(k, flipped, c.genotype);
      CHECK(l.Evaluate(gan) >= l.Base(k) + c.margin);
    }
  }
}

TEST_CASE("fitness tracks hamming distance to the planted genotype") {
  LandscapeConfig c = Config(Mode::kJoint);
  SurrogateLandscape l(2024, c);
  const DepthKey k{3, 4};
  std::vector<int> planted = FlattenJoint(l.Planted(k), c.genotype).values;
  Schema schema = JointSchema(c.genotype, k);
  Rng rng(5);
  std::vector<double> distance, fitness;
  for (int i = 0; i < 2000; ++i) {
    // Perturb a random number of slots so every distance is represented.
    std::vector<int> v = planted;
    const double p = UniformUnit(rng);
    int d = 0;
    for (std::size_t s = 0; s < v.size(); ++s) {
      if (UniformUnit(rng) < p) {
        v[s] = static_cast<int>(UniformIndex(rng, schema[s].cardinality));
      }
      d += v[s] != planted[s];
    }
    distance.push_back(d);
    fitness.push_back(l.Evaluate(UnflattenJoint(k, v, c.genotype)));
  }
  CHECK(Correlation(distance, fitness) > 0.8);
}

TEST_CASE("instances of one family share structure") {
  LandscapeConfig c = Config(Mode::kJoint);
  SurrogateLandscape a(1, c), b(2, c);
  CHECK(a.preferred_depth() == b.preferred_depth());
  REQUIRE(a.pairs().size() == b.pairs().size());
  for (std::size_t i = 0; i < a.pairs().size(); ++i) {
    CHECK(a.pairs()[i].first == b.pairs()[i].first);
    CHECK(a.pairs()[i].second == b.pairs()[i].second);
  }
  int same = 0;
  for (int p = 0; p < a.num_positions(); ++p) {
    same += a.PlantedValue(p) == b.PlantedValue(p);
  }
  CHECK(same >= a.num_positions() / 2);
  CHECK(same < a.num_positions());

  LandscapeConfig other = c;
  other.family_seed = 6;
  SurrogateLandscape d(1, other);
  int agree = 0;
  for (int p = 0; p < a.num_positions(); ++p) {
    agree += a.PlantedValue(p) == d.PlantedValue(p);
  }
  CHECK(agree < same);
}

TEST_CASE("default family prefers a mid-sized depth") {
  CHECK(SurrogateLandscape(1, Config(Mode::kJoint)).preferred_depth() ==
        DepthKey{3, 2});
  CHECK(SurrogateLandscape(1, Config(Mode::kPerNetwork)).preferred_depth() ==
        DepthKey{5, 3});
}

TEST_CASE("base cost grows with distance from the preferred depth") {
  LandscapeConfig c = Config(Mode::kPerNetwork);
  SurrogateLandscape l(9, c);
  DepthKey pref = l.preferred_depth();
  for (DepthKey k : c.genotype.DepthKeys()) {
    int dist = std::abs(k.generator - pref.generator) +
               std::abs(k.discriminator - pref.discriminator);
    CHECK(l.Base(k) >= c.depth_penalty * dist);
    CHECK(l.Base(k) < c.depth_penalty * dist + c.margin);
  }
}

TEST_CASE("invalid inputs") {
  LandscapeConfig c = Config(Mode::kJoint);
  SurrogateLandscape l(1, c);
  Rng rng(6);
  GanSpec gan = RandomGan(c.genotype, rng);
  gan.discriminator.layers.resize(5, gan.discriminator.layers.front());
  CHECK_THROWS_AS(l.Evaluate(gan), ValidationError);
  LandscapeConfig bad = c;
  bad.margin = 0.0;
  CHECK_THROWS_AS(SurrogateLandscape(1, bad), ValidationError);
  bad = c;
  bad.jitter = 1.5;
  CHECK_THROWS_AS(SurrogateLandscape(1, bad), ValidationError);
}

TEST_CASE("json documents") {
  LandscapeConfig c = Config(Mode::kPerNetwork);
  c.jitter = 0.3;
  c.family_seed = 99;
  LandscapeConfig back = LandscapeConfig::FromJson(c.ToJson());
  CHECK(back.ToJson() == c.ToJson());
  SurrogateLandscape l(5, c);
  Json j = LandscapeToJson(l);
  CHECK(j.at("format") == "land-v1");
  CHECK(j.at("planted").size() == static_cast<std::size_t>(l.num_positions()));
  CHECK(j.at("base").size() == 36);
}

}  // TEST_SUITE

}  // namespace
}  // namespace archsmith
