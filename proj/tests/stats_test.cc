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
#include <cmath>
#include <vector>

#include "archsmith/common.h"
#include "archsmith/stats.h"
#include "doctest.h"

namespace archsmith {
namespace {

using G = std::vector<std::vector<double>>;

const G kSeparated = {{1, 2, 3}, {4, 5, 6}, {7, 8, 9}};
const G kTied = {{1, 2, 2, 3}, {2, 3, 4, 4}, {5, 5, 6}};
const G kUneven = {{0.3, 1.7, 2.2, 0.9, 1.1}, {2.5, 3.1, 0.4}, {4.0, 3.3, 2.8, 5.1}};

struct DunnRef {
  int i, j;
  double z, p, bonf;
};

void CheckDunn(const G& groups, const std::vector<DunnRef>& refs) {
  DunnResult d = Dunn(groups);
  for (const DunnRef& r : refs) {
    CAPTURE(r.i);
    CAPTURE(r.j);
    CHECK(d.z[r.i][r.j] == doctest::Approx(r.z).epsilon(1e-10));
    CHECK(d.z[r.j][r.i] == doctest::Approx(-r.z).epsilon(1e-10));
    CHECK(d.p_raw[r.i][r.j] == doctest::Approx(r.p).epsilon(1e-10));
    CHECK(d.p_bonferroni[r.i][r.j] == doctest::Approx(r.bonf).epsilon(1e-10));
  }
  for (std::size_t k = 0; k < groups.size(); ++k) CHECK(d.p_raw[k][k] == 1.0);
}

// One-sample Kolmogorov-Smirnov distance to U(0, 1).
double KsUniform(std::vector<double> p) {
  std::sort(p.begin(), p.end());
  const double n = static_cast<double>(p.size());
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    d = std::max({d, (i + 1) / n - p[i], p[i] - i / n});
  }
  return d;
}

TEST_SUITE("stats") {

// Expected values: tests/oracles/stats_oracle.py (scipy 1.x).
TEST_CASE("kruskal-wallis matches scipy") {
  TestResult a = KruskalWallis(kSeparated);
  CHECK(a.statistic == doctest::Approx(7.200000000000003).epsilon(1e-12));
  CHECK(a.p_value == doctest::Approx(0.02732372244729252).epsilon(1e-10));
  CHECK(a.group_sizes == std::vector<int>{3, 3, 3});

  TestResult b = KruskalWallis(kTied);
  CHECK(b.statistic == doctest::Approx(7.61737089201878).epsilon(1e-12));
  CHECK(b.p_value == doctest::Approx(0.022177313079062778).epsilon(1e-10));
  CHECK(b.tie_correction < 1.0);

  TestResult c = KruskalWallis(kUneven);
  CHECK(c.statistic == doctest::Approx(7.188461538461546).epsilon(1e-12));
  CHECK(c.p_value == doctest::Approx(0.02748181490500517).epsilon(1e-10));
}

TEST_CASE("exact kruskal-wallis matches enumeration") {
  CHECK(KruskalWallisExact(kSeparated).p_value ==
        doctest::Approx(0.0035714285714285713).epsilon(1e-12));
  CHECK(KruskalWallisExact(kTied).p_value ==
        doctest::Approx(0.003982683982683983).epsilon(1e-12));
  CHECK(KruskalWallisExact(kUneven).p_value ==
        doctest::Approx(0.012987012987012988).epsilon(1e-12));
  G big = {{1, 2, 3, 4, 5}, {6, 7, 8, 9}, {10, 11, 12, 13}};
  CHECK_THROWS_AS(KruskalWallisExact(big), ValidationError);
}

TEST_CASE("dunn matches the reference formula") {
  CheckDunn(kSeparated,
            {{0, 1, -1.3416407864998738, 0.17971249487899976, 0.5391374846369993},
             {0, 2, -2.6832815729997477, 0.007290358091535638, 0.021871074274606914},
             {1, 2, -1.3416407864998738, 0.17971249487899976, 0.5391374846369993}});
  CheckDunn(kTied,
            {{0, 1, -1.1917163225479586, 0.23337249567584317, 0.7001174870275295},
             {0, 2, -2.758287311604823, 0.005810510310259867, 0.0174315309307796},
             {1, 2, -1.6549723869628938, 0.0979300992542595, 0.2937902977627785}});
  CheckDunn(kUneven,
            {{0, 1, -0.835509977844025, 0.40343063138083846, 1.0},
             {0, 2, -2.6667467936679814, 0.007658935077902803, 0.02297680523370841},
             {1, 2, -1.5433302083054463, 0.12275067774391889, 0.36825203323175665}});
}

TEST_CASE("dunn separates well-separated groups") {
  G groups(3);
  for (int g = 0; g < 3; ++g) {
    for (int i = 0; i < 10; ++i) groups[g].push_back(g * 10 + i);
  }
  DunnResult d = Dunn(groups);
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) CHECK(d.p_raw[i][j] < 0.05);
  }
}

TEST_CASE("rank-sum matches scipy") {
  std::vector<double> a = {1, 2, 3}, b = {10, 11, 12};
  TestResult r = RankSum(a, b);
  CHECK(r.statistic == 0.0);
  CHECK(r.p_value == doctest::Approx(0.08085559837005224).epsilon(1e-10));
  CHECK(RankSumExact(a, b).p_value == doctest::Approx(0.1).epsilon(1e-12));

  std::vector<double> c = {1, 2, 2, 3, 5}, d = {2, 4, 4, 6, 7, 7};
  TestResult t = RankSum(c, d);
  CHECK(t.statistic == 5.0);
  CHECK(t.p_value == doctest::Approx(0.07864522326072336).epsilon(1e-10));
  CHECK(RankSumExact(c, d).p_value ==
        doctest::Approx(0.0670995670995671).epsilon(1e-12));

  std::vector<double> e = {4, 1, 3, 2}, f = {2, 3, 1, 4};
  CHECK(RankSum(e, f).statistic == 8.0);
  CHECK(RankSum(e, f).p_value == doctest::Approx(1.0));
  CHECK(RankSumExact(e, f).p_value == doctest::Approx(1.0));
}

TEST_CASE("identical groups and full ties") {
  G same = {{1, 2, 3, 4}, {1, 2, 3, 4}, {1, 2, 3, 4}};
  TestResult r = KruskalWallis(same);
  CHECK(r.statistic == doctest::Approx(0.0));
  CHECK(r.p_value == doctest::Approx(1.0));
  G flat = {{2, 2}, {2, 2, 2}};
  TestResult f = KruskalWallis(flat);
  CHECK(f.statistic == 0.0);
  CHECK(f.p_value == 1.0);
  std::vector<double> x = {5, 5, 5}, y = {5, 5};
  CHECK(RankSum(x, y).p_value == 1.0);
}

TEST_CASE("average ranks") {
  std::vector<double> v = {3.0, 1.0, 3.0, 2.0, 3.0};
  CHECK(AverageRanks(v) == std::vector<double>{4.0, 1.0, 4.0, 2.0, 4.0});
}

TEST_CASE("invalid inputs") {
  G one = {{1, 2, 3}};
  CHECK_THROWS_AS(KruskalWallis(one), ValidationError);
  G empty = {{1, 2}, {}};
  CHECK_THROWS_AS(KruskalWallis(empty), ValidationError);
  G tiny = {{1}, {2}};
  CHECK_THROWS_AS(KruskalWallis(tiny), ValidationError);
  G nan = {{1, std::nan("")}, {2, 3}};
  CHECK_THROWS_AS(KruskalWallis(nan), ValidationError);
  CHECK_THROWS_AS(Dunn(one), ValidationError);
  std::vector<double> none;
  std::vector<double> some = {1, 2};
  CHECK_THROWS_AS(RankSum(none, some), ValidationError);
  std::vector<double> big(7, 1.0);
  CHECK_THROWS_AS(RankSumExact(big, big), ValidationError);
}

TEST_CASE("results are invariant to monotone transforms and group order") {
  Rng rng(1);
  for (int t = 0; t < 50; ++t) {
    G groups(3);
    for (auto& g : groups) {
      g.resize(3 + UniformIndex(rng, 6));
      for (double& x : g) x = std::round(UniformUnit(rng) * 20.0);
    }
    G warped = groups;
    for (auto& g : warped) {
      for (double& x : g) x = std::exp(x / 5.0) + 3.0;
    }
    G reordered = {groups[2], groups[0], groups[1]};
    TestResult base = KruskalWallis(groups);
    CHECK(KruskalWallis(warped).statistic == doctest::Approx(base.statistic));
    CHECK(KruskalWallis(reordered).p_value == doctest::Approx(base.p_value));

    TestResult ab = RankSum(groups[0], groups[1]);
    TestResult ba = RankSum(groups[1], groups[0]);
    CHECK(ab.p_value == doctest::Approx(ba.p_value));
    CHECK(ab.statistic + ba.statistic ==
          doctest::Approx(static_cast<double>(groups[0].size() * groups[1].size())));
  }
}

TEST_CASE("p-values are uniform under the null") {
  Rng rng(2);
  std::vector<double> kw, rs;
  for (int t = 0; t < 2000; ++t) {
    G groups(3, std::vector<double>(15));
    for (auto& g : groups) {
      for (double& x : g) x = UniformUnit(rng);
    }
    kw.push_back(KruskalWallis(groups).p_value);
    rs.push_back(RankSum(groups[0], groups[1]).p_value);
  }
  CHECK(KsUniform(kw) < 0.1);
  CHECK(KsUniform(rs) < 0.1);
}

}  // TEST_SUITE

}  // namespace
}  // namespace archsmith
