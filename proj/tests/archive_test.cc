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

#include <algorithm>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "archsmith/archive.h"
#include "doctest.h"

namespace archsmith {
namespace {

const GenotypeConfig kConfig = GenotypeConfig::Joint();

GanSpec Numbered(int i) {
  GanSpec g;
  g.train_freq_bin = i % 5;
  g.generator.layers.push_back({LayerKind::kDense, i % 5, (i / 5) % 3, (i / 15) % 5});
  g.discriminator.layers.push_back({LayerKind::kConv, (i / 75) % 5, 0, 0});
  if (i % 2) g.discriminator.layers.push_back({LayerKind::kDense, 1, 1, 1});
  return g;
}

std::string RunLines(const std::string& run, int count, int offset = 0,
                     const char* problem = "p") {
  std::ostringstream out;
  for (int i = 0; i < count; ++i) {
    Individual ind{Numbered(offset + i), 0.1 * (i + 1), run, problem};
    WriteArchiveRecord(out, ind, kConfig);
  }
  return out.str();
}

RunArchive Parse(const std::string& text) {
  std::istringstream in(text);
  return ParseArchive(in, kConfig);
}

std::vector<double> Fitnesses(const std::vector<Individual>& set) {
  std::vector<double> f;
  for (const Individual& i : set) f.push_back(i.fitness);
  return f;
}

TEST_SUITE("archive") {

TEST_CASE("empty input has no runs") {
  CHECK_THROWS_WITH_AS(Parse(""), doctest::Contains("no runs"), ValidationError);
}

TEST_CASE("two runs of twelve") {
  RunArchive a = Parse(RunLines("a", 12) + RunLines("b", 12, 100));
  REQUIRE(a.runs.size() == 2);
  CHECK(a.runs[0].individuals.size() == 12);
  CHECK(a.runs[1].individuals.size() == 12);
  CHECK(a.NumIndividuals() == 24);
}

TEST_CASE("corrupt line is reported with its number") {
  std::string lines = RunLines("a", 10);
  std::vector<std::string> split;
  std::istringstream in(lines);
  for (std::string l; std::getline(in, l);) split.push_back(l);
  split[3] = "{\"run_id\": \"a\", \"fitness\": ";
  std::string joined;
  for (const std::string& l : split) joined += l + "\n";
  RunArchive a = Parse(joined);
  CHECK(a.NumIndividuals() == 9);
  REQUIRE(a.diagnostics.size() == 1);
  CHECK(a.diagnostics[0].find("line 4") != std::string::npos);
}

TEST_CASE("out-of-bounds depth is rejected per record") {
  std::ostringstream out;
  out << RunLines("a", 10);
  GanSpec deep = Numbered(3);
  deep.generator.layers.assign(4, deep.generator.layers[0]);
  Json rec = Json{{"run_id", "a"}, {"problem_id", "p"}, {"fitness", 1.0},
                  {"gan", Json{{"v", "v1"}, {"train_freq_bin", 0},
                               {"generator", Json::array()},
                               {"discriminator", Json::array()}}}};
  for (int i = 0; i < 4; ++i) {
    rec["gan"]["generator"].push_back(
        {{"kind", "dense"}, {"activation", "relu"}, {"weight_init", "xavier"},
         {"size_bin", 0}});
  }
  rec["gan"]["discriminator"].push_back(
      {{"kind", "conv"}, {"activation", "relu"}, {"weight_init", "xavier"},
       {"size_bin", 0}});
  out << rec.dump() << '\n';
  RunArchive a = Parse(out.str());
  CHECK(a.NumIndividuals() == 10);
  CHECK(a.rejected_records == 1);
  REQUIRE(a.diagnostics.size() == 1);
  CHECK(a.diagnostics[0].find("unsupported depth") != std::string::npos);
}

TEST_CASE("first and second are rank slices") {
  RunArchive a = Parse(RunLines("a", 12));
  EliteSets s = ExtractSets(a, 5, 1);
  std::vector<double> first = Fitnesses(s.first), second = Fitnesses(s.second);
  REQUIRE(first.size() == 5);
  REQUIRE(second.size() == 5);
  for (int i = 0; i < 5; ++i) {
    CHECK(first[i] == doctest::Approx(0.1 * (i + 1)));
    CHECK(second[i] == doctest::Approx(0.1 * (i + 6)));
  }
  CHECK(s.random.size() == 5);
}

TEST_CASE("sizes scale with runs") {
  std::string text;
  for (int r = 0; r < 48; ++r) text += RunLines("run" + std::to_string(r), 10, r * 10);
  EliteSets s = ExtractSets(Parse(text), 5, 0);
  CHECK(s.first.size() == 240);
  CHECK(s.second.size() == 240);
  CHECK(s.random.size() == 240);
}

TEST_CASE("short run is an error naming the run") {
  RunArchive a = Parse(RunLines("big", 12) + RunLines("tiny", 9, 50));
  CHECK_THROWS_WITH_AS(ExtractSets(a, 5, 0), doctest::Contains("tiny"),
                       ValidationError);
}

TEST_CASE("random set is reproducible and seed-dependent") {
  std::string text;
  for (int r = 0; r < 6; ++r) text += RunLines("r" + std::to_string(r), 40, r * 40);
  RunArchive a = Parse(text);
  EliteSets s1 = ExtractSets(a, 5, 9);
  EliteSets s2 = ExtractSets(a, 5, 9);
  EliteSets s3 = ExtractSets(a, 5, 10);
  CHECK(Fitnesses(s1.random) == Fitnesses(s2.random));
  CHECK(Fitnesses(s1.random) != Fitnesses(s3.random));
  // No duplicates within a run's random draws.
  for (std::size_t r = 0; r < 6; ++r) {
    std::vector<Individual> run(s1.random.begin() + r * 5,
                                s1.random.begin() + r * 5 + 5);
    std::vector<double> f = Fitnesses(run);
    std::sort(f.begin(), f.end());
    CHECK(std::adjacent_find(f.begin(), f.end()) == f.end());
  }
}

TEST_CASE("extraction ignores record order") {
  std::string text;
  for (int r = 0; r < 4; ++r) text += RunLines("r" + std::to_string(r), 15, r * 15);
  // Ties at the rank boundary.
  std::ostringstream ties;
  for (int i = 0; i < 12; ++i) {
    WriteArchiveRecord(ties, {Numbered(500 + i), i < 7 ? 1.0 : 2.0, "tie", "p"},
                       kConfig);
  }
  text += ties.str();
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  EliteSets base = ExtractSets(Parse(text), 5, 3);
  std::mt19937 shuffle_rng(4);
  for (int t = 0; t < 5; ++t) {
    std::shuffle(lines.begin(), lines.end(), shuffle_rng);
    std::string shuffled;
    for (const std::string& l : lines) shuffled += l + "\n";
    EliteSets s = ExtractSets(Parse(shuffled), 5, 3);
    REQUIRE(s.first.size() == base.first.size());
    for (std::size_t i = 0; i < s.first.size(); ++i) {
      CHECK(s.first[i].gan == base.first[i].gan);
      CHECK(s.second[i].gan == base.second[i].gan);
      CHECK(s.random[i].gan == base.random[i].gan);
    }
  }
}

TEST_CASE("first and second are disjoint and ordered per run") {
  std::string text;
  for (int r = 0; r < 5; ++r) text += RunLines("r" + std::to_string(r), 20, r * 20);
  EliteSets s = ExtractSets(Parse(text), 4, 0);
  for (std::size_t r = 0; r < 5; ++r) {
    double max_first = 0, min_second = 1e9;
    for (std::size_t i = 0; i < 4; ++i) {
      max_first = std::max(max_first, s.first[r * 4 + i].fitness);
      min_second = std::min(min_second, s.second[r * 4 + i].fitness);
      for (std::size_t k = 0; k < 4; ++k) {
        CHECK_FALSE(s.first[r * 4 + i].gan == s.second[r * 4 + k].gan);
      }
    }
    CHECK(max_first <= min_second);
  }
}

TEST_CASE("repeated genotypes count once with their best fitness") {
  std::ostringstream out;
  for (int i = 0; i < 10; ++i) {
    WriteArchiveRecord(out, {Numbered(i), 1.0 + i, "r", "p"}, kConfig);
    WriteArchiveRecord(out, {Numbered(i), 0.5 + i, "r", "p"}, kConfig);
  }
  EliteSets s = ExtractSets(Parse(out.str()), 5, 0);
  CHECK(s.first.front().fitness == doctest::Approx(0.5));
  CHECK(s.first.size() == 5);
}

TEST_CASE("filter depths") {
  std::vector<Individual> set;
  for (int i = 0; i < 10; ++i) set.push_back({Numbered(i), 1.0, "r", "p"});
  std::set<DepthKey> all;
  for (DepthKey k : kConfig.DepthKeys()) all.insert(k);
  FilterResult r = FilterDepths(set, all);
  CHECK(r.individuals.size() == 10);
  CHECK(r.retained_fraction == doctest::Approx(1.0));
  CHECK(FilterDepths(set, {}).individuals.empty());
  FilterResult only = FilterDepths(set, {DepthKey{1, 1}});
  CHECK(only.individuals.size() == 5);
  CHECK(only.retained_fraction == doctest::Approx(0.5));
  for (const Individual& i : only.individuals) {
    CHECK(DepthKeyOf(i.gan) == DepthKey{1, 1});
  }
}

TEST_CASE("raw continuous attributes are binned by archive quantiles") {
  std::ostringstream out;
  for (int i = 0; i < 20; ++i) {
    Json gan{{"v", "v1"},
             {"train_freq", 1 + i % 5},
             {"generator", {{{"kind", "dense"}, {"activation", "relu"},
                             {"weight_init", "xavier"}, {"neurons", 8 * (i + 1)}}}},
             {"discriminator", {{{"kind", "conv"}, {"activation", "elu"},
                                 {"weight_init", "normal"}, {"neurons", 8 * (20 - i)}}}}};
    out << Json{{"run_id", "r"}, {"fitness", 0.1 * i}, {"gan", gan}}.dump() << '\n';
  }
  RunArchive a = Parse(out.str());
  REQUIRE(a.schemes.layer_size.has_value());
  CHECK(a.schemes.layer_size->arity() == 5);
  CHECK(a.schemes.train_freq->arity() == 5);
  std::vector<int> counts(5, 0);
  for (const Individual& i : a.runs[0].individuals) {
    ++counts[i.gan.generator.layers[0].size_bin];
  }
  CHECK(counts == std::vector<int>{4, 4, 4, 4, 4});
}

TEST_CASE("sets json round-trip") {
  std::string text;
  for (int r = 0; r < 3; ++r) text += RunLines("r" + std::to_string(r), 12, r * 12);
  EliteSets s = ExtractSets(Parse(text), 5, 2);
  EliteSets back = SetsFromJson(Json::parse(SetsToJson(s).dump()));
  CHECK(back.n == 5);
  CHECK(back.seed == 2);
  CHECK(back.archive_hash == s.archive_hash);
  REQUIRE(back.first.size() == s.first.size());
  for (std::size_t i = 0; i < s.first.size(); ++i) {
    CHECK(back.first[i].gan == s.first[i].gan);
    CHECK(back.first[i].fitness == s.first[i].fitness);
    CHECK(back.random[i].run_id == s.random[i].run_id);
  }
  CHECK_THROWS_AS(LoadSets("/nonexistent/sets.json"), IoError);
}

}  // TEST_SUITE

}  // namespace
}  // namespace archsmith
