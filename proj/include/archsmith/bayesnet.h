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

// Discrete Bayesian networks over categorical variables.
//
// Structure comes from pairwise mutual information: either a Chow-Liu
// maximum-weight spanning tree or an ARACNE skeleton (threshold, then
// data-processing-inequality pruning of triangles), oriented along a
// caller-supplied variable order. Parameters are Laplace-smoothed CPTs.
// Scoring is exact full-assignment log-likelihood; sampling is ancestral
// (probabilistic logic sampling). EnumerateJoint is a brute-force oracle
// for small networks.

#ifndef ARCHSMITH_BAYESNET_H_
#define ARCHSMITH_BAYESNET_H_

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "archsmith/common.h"
#include "json.hpp"

namespace archsmith {

// Column-aligned categorical data. columns[v][r] is row r of variable v.
struct Dataset {
  std::vector<int> cardinalities;
  std::vector<std::vector<int>> columns;

  static Dataset FromRows(std::vector<int> cardinalities,
                          std::span<const std::vector<int>> rows);
  int num_variables() const { return static_cast<int>(cardinalities.size()); }
  std::size_t num_rows() const {
    return columns.empty() ? 0 : columns.front().size();
  }
};

// Plug-in entropy of one column, in nats.
double Entropy(const Dataset& data, int i);
// Maximum-likelihood plug-in estimate in nats, clamped to >= 0. Symmetric in
// (i, j) bit for bit.
double MutualInformation(const Dataset& data, int i, int j);

class MiMatrix {
 public:
  explicit MiMatrix(int n = 0)
      : n_(n), values_(static_cast<std::size_t>(n) * n, 0.0) {}
  int size() const { return n_; }
  double at(int i, int j) const {
    return values_[static_cast<std::size_t>(i) * n_ + j];
  }
  void set(int i, int j, double v) {
    values_[static_cast<std::size_t>(i) * n_ + j] = v;
    values_[static_cast<std::size_t>(j) * n_ + i] = v;
  }
  friend bool operator==(const MiMatrix&, const MiMatrix&) = default;

 private:
  int n_;
  std::vector<double> values_;
};

// All pairwise MI values; pairs are computed in parallel with OpenMP.
MiMatrix ComputeMiMatrix(const Dataset& data);
// Single-threaded reference for ComputeMiMatrix; results are identical.
MiMatrix ComputeMiMatrixSerial(const Dataset& data);

// Subtracts ln(c_i * c_j) / (2N) from every entry, the small-sample bias
// allowance applied before thresholding. Entries may become negative.
MiMatrix BiasCorrected(const MiMatrix& mi, const Dataset& data);

// Undirected edge with first < second.
using Edge = std::pair<int, int>;

// Maximum-weight spanning tree (Kruskal). Equal weights are taken in
// lexicographic edge order, so uniform MI yields the star around variable 0.
std::vector<Edge> ChowLiu(const MiMatrix& mi);

// Keeps edges with MI > threshold, then for each triangle of kept edges drops
// (i, j) when MI(i,j) < (1 - tolerance) * min(MI(i,k), MI(j,k)). All removals
// are decided against the unpruned graph. Output is sorted.
std::vector<Edge> AracneSkeleton(const MiMatrix& mi, double threshold,
                                 double tolerance);

struct Variable {
  std::string name;
  int cardinality = 1;
  friend bool operator==(const Variable&, const Variable&) = default;
};

struct Dag {
  std::vector<Variable> variables;
  std::vector<std::vector<int>> parents;  // sorted ascending per variable

  int size() const { return static_cast<int>(variables.size()); }
  std::size_t NumEdges() const;
  // Throws ValidationError on bad indices, self-loops, duplicates or cycles.
  void Validate() const;
  // Kahn's algorithm, smallest index first among ready nodes.
  std::vector<int> TopologicalOrder() const;
  friend bool operator==(const Dag&, const Dag&) = default;
};

// Directs every edge from the variable that comes first in `order` to the
// later one. `order` must be a permutation of 0..n-1.
Dag Orient(const std::vector<Variable>& variables,
           std::span<const Edge> skeleton, std::span<const int> order);

class BayesNet {
 public:
  BayesNet() = default;
  BayesNet(Dag dag, std::vector<std::vector<double>> cpts, double alpha);

  const Dag& dag() const { return dag_; }
  double alpha() const { return alpha_; }
  int size() const { return dag_.size(); }
  const std::vector<int>& topological_order() const { return order_; }

  // Row index of the parent configuration of `v` within `assignment`.
  std::size_t ParentConfig(int v, std::span<const int> assignment) const;
  std::size_t NumParentConfigs(int v) const { return num_configs_[v]; }
  // P(v = value | parents in config row).
  double Probability(int v, std::size_t config, int value) const {
    return cpts_[v][config * dag_.variables[v].cardinality + value];
  }
  std::span<const double> Row(int v, std::size_t config) const {
    auto card = static_cast<std::size_t>(dag_.variables[v].cardinality);
    return std::span<const double>(cpts_[v]).subspan(config * card, card);
  }
  const std::vector<std::vector<double>>& cpts() const { return cpts_; }

 private:
  Dag dag_;
  std::vector<std::vector<double>> cpts_;  // [v][config * card + value]
  std::vector<std::size_t> num_configs_;
  std::vector<int> order_;
  double alpha_ = 1.0;
};

// P(x = v | pa = c) = (n(v, c) + alpha) / (n(c) + alpha * card). Unseen parent
// configurations get the uniform row. alpha must be >= 0.
BayesNet FitCpts(const Dag& dag, const Dataset& data, double alpha);

// Sum of ln P(x_v | pa_v). Throws ValidationError on wrong length or
// out-of-range values. Returns -inf if a zero-probability entry is hit.
double LogLikelihood(const BayesNet& bn, std::span<const int> assignment);

// Ancestral sampling in topological order.
std::vector<int> PlsSample(const BayesNet& bn, Rng& rng);

struct JointEntry {
  std::vector<int> assignment;
  double probability = 0.0;
};

inline constexpr std::uint64_t kDefaultEnumerationCap = 1'000'000;

// Every full assignment (mixed radix, last variable fastest) with its
// probability. Throws ValidationError when the state space exceeds `cap`.
std::vector<JointEntry> EnumerateJoint(
    const BayesNet& bn, std::uint64_t cap = kDefaultEnumerationCap);

enum class StructureAlgorithm { kAracne, kChowLiu };
const char* StructureAlgorithmName(StructureAlgorithm algo);
StructureAlgorithm ParseStructureAlgorithm(const std::string& name);

struct StructureOptions {
  StructureAlgorithm algorithm = StructureAlgorithm::kAracne;
  double mi_threshold = 0.0;
  double dpi_tolerance = 0.1;
  bool bias_correction = true;
};

// MI -> skeleton -> Orient(order) -> FitCpts(alpha).
BayesNet LearnBayesNet(const Dataset& data, const std::vector<Variable>& vars,
                       std::span<const int> order,
                       const StructureOptions& options, double alpha);

// "bn-v1" document. Probabilities are written as shortest round-trip
// decimals, so FromJson(ToJson(bn)) is bit-identical.
nlohmann::json BayesNetToJson(const BayesNet& bn);
BayesNet BayesNetFromJson(const nlohmann::json& j);

}  // namespace archsmith

#endif  // ARCHSMITH_BAYESNET_H_
