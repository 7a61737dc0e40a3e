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

#include "archsmith/bayesnet.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

namespace archsmith {

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(int n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }
  int Find(int x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  bool Union(int a, int b) {
    a = Find(a);
    b = Find(b);
    if (a == b) return false;
    parent_[std::max(a, b)] = std::min(a, b);
    return true;
  }

 private:
  std::vector<int> parent_;
};

void CheckColumn(const Dataset& data, int i) {
  if (i < 0 || i >= data.num_variables()) {
    throw ValidationError("variable index out of range");
  }
}

std::vector<std::size_t> ComputeNumConfigs(const Dag& dag) {
  std::vector<std::size_t> out(dag.size(), 1);
  for (int v = 0; v < dag.size(); ++v) {
    for (int p : dag.parents[v]) {
      out[v] *= static_cast<std::size_t>(dag.variables[p].cardinality);
    }
  }
  return out;
}

}  // namespace

Dataset Dataset::FromRows(std::vector<int> cardinalities,
                          std::span<const std::vector<int>> rows) {
  Dataset d;
  d.cardinalities = std::move(cardinalities);
  d.columns.assign(d.cardinalities.size(), {});
  for (auto& c : d.columns) c.reserve(rows.size());
  for (const auto& row : rows) {
    if (row.size() != d.cardinalities.size()) {
      throw ValidationError("row width does not match variable count");
    }
    for (std::size_t v = 0; v < row.size(); ++v) {
      if (row[v] < 0 || row[v] >= d.cardinalities[v]) {
        throw ValidationError("value out of range in dataset row");
      }
      d.columns[v].push_back(row[v]);
    }
  }
  return d;
}

double Entropy(const Dataset& data, int i) {
  CheckColumn(data, i);
  const std::size_t n = data.num_rows();
  if (n == 0) return 0.0;
  std::vector<std::size_t> counts(data.cardinalities[i], 0);
  for (int x : data.columns[i]) ++counts[x];
  double h = 0.0;
  for (std::size_t c : counts) {
    if (c == 0) continue;
    double p = static_cast<double>(c) / static_cast<double>(n);
    h -= p * std::log(p);
  }
  return h;
}

double MutualInformation(const Dataset& data, int i, int j) {
  CheckColumn(data, i);
  CheckColumn(data, j);
  if (i == j) throw ValidationError("mutual information needs i != j");
  if (i > j) std::swap(i, j);
  const std::size_t n = data.num_rows();
  if (n == 0) throw ValidationError("mutual information needs >= 1 row");
  const int ci = data.cardinalities[i];
  const int cj = data.cardinalities[j];
  std::vector<std::size_t> joint(static_cast<std::size_t>(ci) * cj, 0);
  std::vector<std::size_t> count_i(ci, 0), count_j(cj, 0);
  const auto& xi = data.columns[i];
  const auto& xj = data.columns[j];
  for (std::size_t r = 0; r < n; ++r) {
    ++joint[static_cast<std::size_t>(xi[r]) * cj + xj[r]];
    ++count_i[xi[r]];
    ++count_j[xj[r]];
  }
  const double total = static_cast<double>(n);
  double mi = 0.0;
  for (int a = 0; a < ci; ++a) {
    for (int b = 0; b < cj; ++b) {
      std::size_t nab = joint[static_cast<std::size_t>(a) * cj + b];
      if (nab == 0) continue;
      double ratio = static_cast<double>(nab) * total /
                     (static_cast<double>(count_i[a]) *
                      static_cast<double>(count_j[b]));
      mi += static_cast<double>(nab) / total * std::log(ratio);
    }
  }
  return std::max(mi, 0.0);
}

MiMatrix ComputeMiMatrixSerial(const Dataset& data) {
  const int n = data.num_variables();
  MiMatrix mi(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) mi.set(i, j, MutualInformation(data, i, j));
  }
  return mi;
}

MiMatrix ComputeMiMatrix(const Dataset& data) {
  const int n = data.num_variables();
  MiMatrix mi(n);
  std::vector<Edge> pairs;
  pairs.reserve(static_cast<std::size_t>(n) * (n > 0 ? n - 1 : 0) / 2);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  }
  std::vector<double> values(pairs.size());
  const auto num_pairs = static_cast<std::int64_t>(pairs.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::int64_t p = 0; p < num_pairs; ++p) {
    values[p] = MutualInformation(data, pairs[p].first, pairs[p].second);
  }
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    mi.set(pairs[p].first, pairs[p].second, values[p]);
  }
  return mi;
}

MiMatrix BiasCorrected(const MiMatrix& mi, const Dataset& data) {
  MiMatrix out(mi.size());
  const double n =
      static_cast<double>(std::max<std::size_t>(data.num_rows(), 1));
  for (int i = 0; i < mi.size(); ++i) {
    for (int j = i + 1; j < mi.size(); ++j) {
      double penalty = std::log(static_cast<double>(data.cardinalities[i]) *
                                data.cardinalities[j]) /
                       (2.0 * n);
      out.set(i, j, mi.at(i, j) - penalty);
    }
  }
  return out;
}

std::vector<Edge> ChowLiu(const MiMatrix& mi) {
  const int n = mi.size();
  std::vector<Edge> candidates;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) candidates.emplace_back(i, j);
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [&](const Edge& a, const Edge& b) {
                     return mi.at(a.first, a.second) > mi.at(b.first, b.second);
                   });
  DisjointSets sets(n);
  std::vector<Edge> tree;
  for (const Edge& e : candidates) {
    if (static_cast<int>(tree.size()) + 1 >= n) break;
    if (sets.Union(e.first, e.second)) tree.push_back(e);
  }
  std::sort(tree.begin(), tree.end());
  return tree;
}

std::vector<Edge> AracneSkeleton(const MiMatrix& mi, double threshold,
                                 double tolerance) {
  if (tolerance < 0.0 || tolerance > 1.0) {
    throw ValidationError("DPI tolerance must lie in [0, 1]");
  }
  if (threshold < 0.0) throw ValidationError("MI threshold must be >= 0");
  const int n = mi.size();
  std::vector<char> kept(static_cast<std::size_t>(n) * n, 0);
  auto idx = [n](int i, int j) { return static_cast<std::size_t>(i) * n + j; };
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (mi.at(i, j) > threshold) kept[idx(i, j)] = kept[idx(j, i)] = 1;
    }
  }
  std::vector<Edge> out;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (!kept[idx(i, j)]) continue;
      bool pruned = false;
      for (int k = 0; k < n && !pruned; ++k) {
        if (k == i || k == j || !kept[idx(i, k)] || !kept[idx(j, k)]) continue;
        double weaker = std::min(mi.at(i, k), mi.at(j, k));
        pruned = mi.at(i, j) < (1.0 - tolerance) * weaker;
      }
      if (!pruned) out.emplace_back(i, j);
    }
  }
  return out;
}

std::size_t Dag::NumEdges() const {
  std::size_t e = 0;
  for (const auto& p : parents) e += p.size();
  return e;
}

void Dag::Validate() const {
  if (parents.size() != variables.size()) {
    throw ValidationError("parent list count does not match variables");
  }
  for (int v = 0; v < size(); ++v) {
    if (variables[v].cardinality < 1) {
      throw ValidationError("variable cardinality must be >= 1");
    }
    const auto& ps = parents[v];
    for (std::size_t k = 0; k < ps.size(); ++k) {
      if (ps[k] < 0 || ps[k] >= size()) {
        throw ValidationError("parent index out of range");
      }
      if (ps[k] == v) throw ValidationError("self-loop in DAG");
      if (k > 0 && ps[k - 1] >= ps[k]) {
        throw ValidationError("parents must be unique and sorted");
      }
    }
  }
  if (static_cast<int>(TopologicalOrder().size()) != size()) {
    throw ValidationError("graph contains a cycle");
  }
}

std::vector<int> Dag::TopologicalOrder() const {
  const int n = size();
  std::vector<int> indegree(n, 0);
  std::vector<std::vector<int>> children(n);
  for (int v = 0; v < n; ++v) {
    for (int p : parents[v]) {
      if (p < 0 || p >= n) continue;
      children[p].push_back(v);
      ++indegree[v];
    }
  }
  std::priority_queue<int, std::vector<int>, std::greater<>> ready;
  for (int v = 0; v < n; ++v) {
    if (indegree[v] == 0) ready.push(v);
  }
  std::vector<int> order;
  while (!ready.empty()) {
    int v = ready.top();
    ready.pop();
    order.push_back(v);
    for (int c : children[v]) {
      if (--indegree[c] == 0) ready.push(c);
    }
  }
  return order;
}

Dag Orient(const std::vector<Variable>& variables,
           std::span<const Edge> skeleton, std::span<const int> order) {
  const int n = static_cast<int>(variables.size());
  if (static_cast<int>(order.size()) != n) {
    throw ValidationError("orientation order must cover every variable");
  }
  std::vector<int> position(n, -1);
  for (int k = 0; k < n; ++k) {
    if (order[k] < 0 || order[k] >= n || position[order[k]] != -1) {
      throw ValidationError("orientation order is not a permutation");
    }
    position[order[k]] = k;
  }
  Dag dag{variables, std::vector<std::vector<int>>(n)};
  for (const Edge& e : skeleton) {
    if (e.first == e.second || e.first < 0 || e.second < 0 || e.first >= n ||
        e.second >= n) {
      throw ValidationError("bad skeleton edge");
    }
    auto [from, to] = position[e.first] < position[e.second]
                          ? e
                          : Edge{e.second, e.first};
    dag.parents[to].push_back(from);
  }
  for (auto& ps : dag.parents) {
    std::sort(ps.begin(), ps.end());
    ps.erase(std::unique(ps.begin(), ps.end()), ps.end());
  }
  return dag;
}

BayesNet::BayesNet(Dag dag, std::vector<std::vector<double>> cpts,
                   double alpha)
    : dag_(std::move(dag)), cpts_(std::move(cpts)), alpha_(alpha) {
  dag_.Validate();
  num_configs_ = ComputeNumConfigs(dag_);
  if (cpts_.size() != static_cast<std::size_t>(dag_.size())) {
    throw ValidationError("CPT count does not match variables");
  }
  for (int v = 0; v < dag_.size(); ++v) {
    const auto card = static_cast<std::size_t>(dag_.variables[v].cardinality);
    if (cpts_[v].size() != num_configs_[v] * card) {
      throw ValidationError("CPT size mismatch for " + dag_.variables[v].name);
    }
    for (std::size_t c = 0; c < num_configs_[v]; ++c) {
      double sum = 0.0;
      for (std::size_t x = 0; x < card; ++x) {
        double p = cpts_[v][c * card + x];
        if (!(p >= 0.0)) throw ValidationError("negative CPT entry");
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-9) {
        throw ValidationError("CPT row does not sum to 1");
      }
    }
  }
  order_ = dag_.TopologicalOrder();
}

std::size_t BayesNet::ParentConfig(int v,
                                   std::span<const int> assignment) const {
  std::size_t config = 0;
  for (int p : dag_.parents[v]) {
    config = config * static_cast<std::size_t>(dag_.variables[p].cardinality) +
             static_cast<std::size_t>(assignment[p]);
  }
  return config;
}

BayesNet FitCpts(const Dag& dag, const Dataset& data, double alpha) {
  if (alpha < 0.0) throw ValidationError("alpha must be >= 0");
  dag.Validate();
  if (data.num_variables() != dag.size()) {
    throw ValidationError("dataset columns do not match DAG variables");
  }
  for (int v = 0; v < dag.size(); ++v) {
    if (data.cardinalities[v] != dag.variables[v].cardinality) {
      throw ValidationError("cardinality mismatch for " +
                            dag.variables[v].name);
    }
  }
  const auto num_configs = ComputeNumConfigs(dag);
  const std::size_t rows = data.num_rows();
  std::vector<std::vector<double>> cpts(dag.size());
  for (int v = 0; v < dag.size(); ++v) {
    const auto card = static_cast<std::size_t>(dag.variables[v].cardinality);
    std::vector<double> counts(num_configs[v] * card, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
      std::size_t config = 0;
      for (int p : dag.parents[v]) {
        config =
            config * static_cast<std::size_t>(dag.variables[p].cardinality) +
            static_cast<std::size_t>(data.columns[p][r]);
      }
      counts[config * card + data.columns[v][r]] += 1.0;
    }
    auto& table = cpts[v];
    table.resize(counts.size());
    for (std::size_t c = 0; c < num_configs[v]; ++c) {
      double n_c = 0.0;
      for (std::size_t x = 0; x < card; ++x) n_c += counts[c * card + x];
      const double denom = n_c + alpha * static_cast<double>(card);
      for (std::size_t x = 0; x < card; ++x) {
        table[c * card + x] = denom > 0.0
                                  ? (counts[c * card + x] + alpha) / denom
                                  : 1.0 / static_cast<double>(card);
      }
    }
  }
  return BayesNet(dag, std::move(cpts), alpha);
}

double LogLikelihood(const BayesNet& bn, std::span<const int> assignment) {
  const Dag& dag = bn.dag();
  if (static_cast<int>(assignment.size()) != dag.size()) {
    throw ValidationError("assignment does not cover every variable");
  }
  for (int v = 0; v < dag.size(); ++v) {
    if (assignment[v] < 0 || assignment[v] >= dag.variables[v].cardinality) {
      throw ValidationError("value out of range for " + dag.variables[v].name);
    }
  }
  double ll = 0.0;
  for (int v = 0; v < dag.size(); ++v) {
    ll += std::log(
        bn.Probability(v, bn.ParentConfig(v, assignment), assignment[v]));
  }
  return ll;
}

std::vector<int> PlsSample(const BayesNet& bn, Rng& rng) {
  std::vector<int> x(bn.size(), 0);
  for (int v : bn.topological_order()) {
    x[v] = static_cast<int>(
        SampleCategorical(rng, bn.Row(v, bn.ParentConfig(v, x))));
  }
  return x;
}

std::vector<JointEntry> EnumerateJoint(const BayesNet& bn, std::uint64_t cap) {
  const Dag& dag = bn.dag();
  std::uint64_t states = 1;
  for (const Variable& var : dag.variables) {
    states *= static_cast<std::uint64_t>(var.cardinality);
    if (states > cap) {
      throw ValidationError("joint state space exceeds enumeration cap");
    }
  }
  std::vector<JointEntry> out;
  out.reserve(states);
  std::vector<int> x(dag.size(), 0);
  for (std::uint64_t s = 0; s < states; ++s) {
    double p = 1.0;
    for (int v = 0; v < dag.size(); ++v) {
      p *= bn.Probability(v, bn.ParentConfig(v, x), x[v]);
    }
    out.push_back({x, p});
    for (int v = dag.size() - 1; v >= 0; --v) {
      if (++x[v] < dag.variables[v].cardinality) break;
      x[v] = 0;
    }
  }
  return out;
}

const char* StructureAlgorithmName(StructureAlgorithm algo) {
  return algo == StructureAlgorithm::kAracne ? "aracne" : "chow_liu";
}

StructureAlgorithm ParseStructureAlgorithm(const std::string& name) {
  if (name == "aracne") return StructureAlgorithm::kAracne;
  if (name == "chow_liu") return StructureAlgorithm::kChowLiu;
  throw ValidationError("unknown structure algorithm '" + name + "'");
}

BayesNet LearnBayesNet(const Dataset& data, const std::vector<Variable>& vars,
                       std::span<const int> order,
                       const StructureOptions& options, double alpha) {
  MiMatrix mi = ComputeMiMatrixSerial(data);
  if (options.bias_correction) mi = BiasCorrected(mi, data);
  std::vector<Edge> skeleton;
  if (options.algorithm == StructureAlgorithm::kChowLiu) {
    skeleton = ChowLiu(mi);
  } else {
    skeleton = AracneSkeleton(mi, options.mi_threshold, options.dpi_tolerance);
  }
  return FitCpts(Orient(vars, skeleton, order), data, alpha);
}

nlohmann::json BayesNetToJson(const BayesNet& bn) {
  using nlohmann::json;
  const Dag& dag = bn.dag();
  json vars = json::array();
  for (const Variable& v : dag.variables) {
    vars.push_back({{"name", v.name}, {"cardinality", v.cardinality}});
  }
  json edges = json::array();
  for (int v = 0; v < dag.size(); ++v) {
    for (int p : dag.parents[v]) edges.push_back({p, v});
  }
  json cpts = json::array();
  for (int v = 0; v < dag.size(); ++v) {
    json rows = json::array();
    for (std::size_t c = 0; c < bn.NumParentConfigs(v); ++c) {
      auto row = bn.Row(v, c);
      rows.push_back(std::vector<double>(row.begin(), row.end()));
    }
    cpts.push_back(std::move(rows));
  }
  return json{{"format", "bn-v1"},
              {"alpha", bn.alpha()},
              {"variables", std::move(vars)},
              {"edges", std::move(edges)},
              {"cpts", std::move(cpts)}};
}

BayesNet BayesNetFromJson(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "bn-v1") {
      throw ValidationError("unsupported Bayesian network format");
    }
    Dag dag;
    for (const auto& vj : j.at("variables")) {
      dag.variables.push_back(
          {vj.at("name").get<std::string>(), vj.at("cardinality").get<int>()});
    }
    dag.parents.assign(dag.variables.size(), {});
    for (const auto& ej : j.at("edges")) {
      int p = ej.at(0).get<int>();
      int c = ej.at(1).get<int>();
      if (c < 0 || c >= dag.size()) throw ValidationError("bad edge");
      dag.parents[c].push_back(p);
    }
    for (auto& ps : dag.parents) std::sort(ps.begin(), ps.end());
    std::vector<std::vector<double>> cpts;
    for (const auto& rows : j.at("cpts")) {
      std::vector<double> table;
      for (const auto& row : rows) {
        for (const auto& p : row) table.push_back(p.get<double>());
      }
      cpts.push_back(std::move(table));
    }
    return BayesNet(std::move(dag), std::move(cpts),
                    j.at("alpha").get<double>());
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("corrupt bn-v1 document: ") + e.what());
  }
}

}  // namespace archsmith
