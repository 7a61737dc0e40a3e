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

#include "archsmith/stats.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/special_functions/gamma.hpp>

#include "archsmith/common.h"

namespace archsmith {

namespace {

constexpr int kMaxExactN = 12;

struct Pooled {
  std::vector<double> values;
  std::vector<int> labels;
  std::vector<int> sizes;
};

Pooled Pool(Groups groups) {
  if (groups.size() < 2) throw ValidationError("need at least two groups");
  Pooled p;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].empty()) {
      throw ValidationError("group " + std::to_string(g) + " is empty");
    }
    for (double v : groups[g]) {
      if (std::isnan(v)) throw ValidationError("NaN in test input");
      p.values.push_back(v);
      p.labels.push_back(static_cast<int>(g));
    }
    p.sizes.push_back(static_cast<int>(groups[g].size()));
  }
  return p;
}

// sum(t^3 - t) over tie blocks.
double TieSum(std::span<const double> values) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    double t = static_cast<double>(j - i);
    sum += t * t * t - t;
    i = j;
  }
  return sum;
}

double TwoSidedNormal(double z) {
  return std::min(1.0, std::erfc(std::abs(z) / std::sqrt(2.0)));
}

// Uncorrected H; the tie correction is a constant divisor for fixed data.
double RawH(std::span<const double> ranks, std::span<const int> labels,
            std::span<const int> sizes) {
  std::vector<double> sums(sizes.size(), 0.0);
  for (std::size_t i = 0; i < ranks.size(); ++i) sums[labels[i]] += ranks[i];
  const double n = static_cast<double>(ranks.size());
  double acc = 0.0;
  for (std::size_t g = 0; g < sizes.size(); ++g) {
    acc += sums[g] * sums[g] / sizes[g];
  }
  return 12.0 / (n * (n + 1.0)) * acc - 3.0 * (n + 1.0);
}

// Counts distinct relabellings whose statistic reaches the observed one.
template <typename Stat>
double ExactP(std::vector<int> labels, Stat stat, double observed) {
  std::sort(labels.begin(), labels.end());
  const double tol = 1e-9 * std::max(1.0, std::abs(observed));
  long long hits = 0, total = 0;
  do {
    ++total;
    if (stat(labels) >= observed - tol) ++hits;
  } while (std::next_permutation(labels.begin(), labels.end()));
  return static_cast<double>(hits) / static_cast<double>(total);
}

}  // namespace

std::vector<double> AverageRanks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
    return values[a] < values[b];
  });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && values[order[j]] == values[order[i]]) ++j;
    double r = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t m = i; m < j; ++m) ranks[order[m]] = r;
    i = j;
  }
  return ranks;
}

TestResult KruskalWallis(Groups groups) {
  Pooled p = Pool(groups);
  const double n = static_cast<double>(p.values.size());
  if (p.values.size() < 3) throw ValidationError("need at least 3 values");
  TestResult r;
  r.group_sizes = p.sizes;
  r.tie_correction = 1.0 - TieSum(p.values) / (n * n * n - n);
  if (r.tie_correction <= 0.0) {
    r.statistic = 0.0;
    r.p_value = 1.0;
    return r;
  }
  std::vector<double> ranks = AverageRanks(p.values);
  r.statistic = std::max(0.0, RawH(ranks, p.labels, p.sizes) / r.tie_correction);
  double df = static_cast<double>(groups.size() - 1);
  r.p_value = std::clamp(
      boost::math::gamma_q(df / 2.0, r.statistic / 2.0), 0.0, 1.0);
  return r;
}

TestResult KruskalWallisExact(Groups groups) {
  TestResult r = KruskalWallis(groups);
  Pooled p = Pool(groups);
  if (p.values.size() > kMaxExactN) {
    throw ValidationError("exact mode supports at most 12 values");
  }
  if (r.tie_correction <= 0.0) return r;
  std::vector<double> ranks = AverageRanks(p.values);
  double observed = RawH(ranks, p.labels, p.sizes);
  r.p_value = ExactP(
      p.labels,
      [&](const std::vector<int>& labels) {
        return RawH(ranks, labels, p.sizes);
      },
      observed);
  return r;
}

DunnResult Dunn(Groups groups) {
  Pooled p = Pool(groups);
  const std::size_t k = groups.size();
  const double n = static_cast<double>(p.values.size());
  if (p.values.size() < 3) throw ValidationError("need at least 3 values");
  std::vector<double> ranks = AverageRanks(p.values);
  std::vector<double> mean(k, 0.0);
  for (std::size_t i = 0; i < ranks.size(); ++i) mean[p.labels[i]] += ranks[i];
  for (std::size_t g = 0; g < k; ++g) mean[g] /= p.sizes[g];

  const double sigma2 = n * (n + 1.0) / 12.0 - TieSum(p.values) / (12.0 * (n - 1.0));
  const double comparisons = static_cast<double>(k * (k - 1) / 2);
  DunnResult d;
  d.z.assign(k, std::vector<double>(k, 0.0));
  d.p_raw.assign(k, std::vector<double>(k, 1.0));
  d.p_bonferroni.assign(k, std::vector<double>(k, 1.0));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      double se = std::sqrt(sigma2 * (1.0 / p.sizes[i] + 1.0 / p.sizes[j]));
      double z = se > 0.0 ? (mean[i] - mean[j]) / se : 0.0;
      double pr = se > 0.0 ? TwoSidedNormal(z) : 1.0;
      d.z[i][j] = z;
      d.z[j][i] = -z;
      d.p_raw[i][j] = d.p_raw[j][i] = pr;
      d.p_bonferroni[i][j] = d.p_bonferroni[j][i] =
          std::min(1.0, pr * comparisons);
    }
  }
  return d;
}

TestResult RankSum(std::span<const double> a, std::span<const double> b) {
  std::vector<double> ga(a.begin(), a.end()), gb(b.begin(), b.end());
  std::vector<double> both[] = {ga, gb};
  Pooled p = Pool(both);
  const double n1 = static_cast<double>(a.size());
  const double n2 = static_cast<double>(b.size());
  const double n = n1 + n2;
  std::vector<double> ranks = AverageRanks(p.values);
  double r1 = std::accumulate(ranks.begin(), ranks.begin() + a.size(), 0.0);

  TestResult r;
  r.group_sizes = p.sizes;
  const double ties = TieSum(p.values);
  r.tie_correction = n > 1.0 ? 1.0 - ties / (n * n * n - n) : 1.0;
  r.statistic = r1 - n1 * (n1 + 1.0) / 2.0;
  const double mu = n1 * n2 / 2.0;
  const double var =
      n > 1.0 ? n1 * n2 / 12.0 * ((n + 1.0) - ties / (n * (n - 1.0))) : 0.0;
  if (var <= 0.0) {
    r.p_value = 1.0;
    return r;
  }
  double z = std::max(0.0, std::abs(r.statistic - mu) - 0.5) / std::sqrt(var);
  r.p_value = TwoSidedNormal(z);
  return r;
}

TestResult RankSumExact(std::span<const double> a, std::span<const double> b) {
  TestResult r = RankSum(a, b);
  const std::size_t n = a.size() + b.size();
  if (n > kMaxExactN) {
    throw ValidationError("exact mode supports at most 12 values");
  }
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  std::vector<double> ranks = AverageRanks(pooled);
  std::vector<int> labels(n, 1);
  std::fill(labels.begin(), labels.begin() + a.size(), 0);
  const double mu = static_cast<double>(a.size() * b.size()) / 2.0;
  const double offset = static_cast<double>(a.size() * (a.size() + 1)) / 2.0;
  auto deviation = [&](const std::vector<int>& l) {
    double r1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (l[i] == 0) r1 += ranks[i];
    }
    return std::abs(r1 - offset - mu);
  };
  r.p_value = ExactP(labels, deviation, deviation(labels));
  return r;
}

}  // namespace archsmith
