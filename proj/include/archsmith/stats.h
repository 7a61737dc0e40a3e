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

// Rank-based tests: Kruskal-Wallis, Dunn's post-hoc comparisons and the
// Mann-Whitney rank-sum test. Asymptotic p-values by default; exact
// permutation variants enumerate every relabelling and are meant for small
// samples.

#ifndef ARCHSMITH_STATS_H_
#define ARCHSMITH_STATS_H_

#include <span>
#include <vector>

namespace archsmith {

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::vector<int> group_sizes;
  // 1 - sum(t^3 - t) / (N^3 - N) over tie blocks of size t.
  double tie_correction = 1.0;
};

using Groups = std::span<const std::vector<double>>;

// Average ranks (1-based) of the pooled values, in input order.
std::vector<double> AverageRanks(std::span<const double> values);

// H with tie correction; p from chi-square with k - 1 degrees of freedom.
// All values tied gives H = 0, p = 1. Needs k >= 2, every group non-empty
// and N >= 3.
TestResult KruskalWallis(Groups groups);

// Fraction of distinct relabellings with H at least the observed value.
// Needs N <= 12.
TestResult KruskalWallisExact(Groups groups);

struct DunnResult {
  // k x k, symmetric, unit diagonal.
  std::vector<std::vector<double>> z;
  std::vector<std::vector<double>> p_raw;
  std::vector<std::vector<double>> p_bonferroni;
};

DunnResult Dunn(Groups groups);

// statistic is U of `a`; two-sided normal approximation with tie and
// continuity correction.
TestResult RankSum(std::span<const double> a, std::span<const double> b);

// Two-sided exact p over all C(N, |a|) splits. Needs N <= 12.
TestResult RankSumExact(std::span<const double> a, std::span<const double> b);

}  // namespace archsmith

#endif  // ARCHSMITH_STATS_H_
