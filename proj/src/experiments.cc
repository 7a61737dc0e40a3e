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

#include "archsmith/experiments.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

namespace archsmith {

namespace {

constexpr const char* kSetNames[] = {"first", "second", "random"};
constexpr const char* kSamplingSets[] = {"sampled", "first", "random"};

// Independent stream for one (purpose, index) pair under the master seed.
Rng StreamRng(std::uint64_t seed, std::string_view purpose,
              std::uint64_t index) {
  Fnv1a h;
  h.Add(purpose);
  h.Add(index);
  return Rng(Mix64(Mix64(seed) ^ h.Digest()));
}

std::vector<std::uint64_t> SeedList(const Json& j, const char* key,
                                    std::vector<std::uint64_t> fallback) {
  if (!j.contains(key)) return fallback;
  return j.at(key).get<std::vector<std::uint64_t>>();
}

std::string FormatOptional(double v) {
  return std::isnan(v) ? std::string() : FormatDouble(v);
}

}  // namespace

std::string FormatDouble(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string ProblemId(std::uint64_t landscape_seed) {
  return "landscape-" + std::to_string(landscape_seed);
}

Json ExperimentConfig::ToJson() const {
  Json mm = metamodel.ToJson();
  mm.erase("genotype");
  return Json{{"experiment", experiment},
              {"landscape", landscape.ToJson()},
              {"metamodel", std::move(mm)},
              {"ea", ea.ToJson()},
              {"seed", seed},
              {"archive_seeds", archive_seeds},
              {"runs_per_landscape", runs_per_landscape},
              {"n", n},
              {"train_seeds", train_seeds},
              {"holdout_seeds", holdout_seeds},
              {"target_seed", target_seed},
              {"uniform_metamodel", uniform_metamodel},
              {"replicates", replicates},
              {"samples", samples},
              {"budget", budget},
              {"min_scored", min_scored},
              {"parallel", parallel}};
}

ExperimentConfig ExperimentConfig::FromJson(const Json& j) {
  if (!j.is_object()) throw ValidationError("config must be an object");
  ExperimentConfig c;
  try {
    c.experiment = j.value("experiment", c.experiment);
    if (j.contains("landscape")) {
      c.landscape = LandscapeConfig::FromJson(j.at("landscape"));
    }
    if (j.contains("metamodel")) {
      c.metamodel = MetamodelConfig::FromJson(j.at("metamodel"));
    }
    if (j.contains("ea")) c.ea = EaConfig::FromJson(j.at("ea"));
    c.seed = j.value("seed", c.seed);
    c.archive_seeds = SeedList(j, "archive_seeds", c.archive_seeds);
    c.runs_per_landscape = j.value("runs_per_landscape", c.runs_per_landscape);
    c.n = j.value("n", c.n);
    c.train_seeds = SeedList(j, "train_seeds", c.train_seeds);
    c.holdout_seeds = SeedList(j, "holdout_seeds", c.holdout_seeds);
    c.target_seed = j.value("target_seed", c.target_seed);
    c.uniform_metamodel = j.value("uniform_metamodel", c.uniform_metamodel);
    c.replicates = j.value("replicates", c.replicates);
    c.samples = j.value("samples", c.samples);
    c.budget = j.value("budget", c.budget);
    c.min_scored = j.value("min_scored", c.min_scored);
    c.parallel = j.value("parallel", c.parallel);
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("bad config: ") + e.what());
  }
  c.metamodel.genotype = c.landscape.genotype;
  c.Validate();
  return c;
}

void ExperimentConfig::Validate() const {
  static const char* kKnown[] = {"",         "likelihood",     "sampling",
                                 "initialization", "guided-search"};
  if (std::find_if(std::begin(kKnown), std::end(kKnown), [&](const char* k) {
        return experiment == k;
      }) == std::end(kKnown)) {
    throw ValidationError("unknown experiment '" + experiment + "'");
  }
  if (replicates < 1) throw ValidationError("replicates must be >= 1");
  if (samples < 1) throw ValidationError("samples must be >= 1");
  if (budget < 1) throw ValidationError("budget must be >= 1");
  if (n < 1) throw ValidationError("n must be >= 1");
  if (runs_per_landscape < 1) {
    throw ValidationError("runs_per_landscape must be >= 1");
  }
  if (ea.population < 1 || ea.generations < 1) {
    throw ValidationError("EA population and generations must be >= 1");
  }
  landscape.genotype.Validate();
}

std::vector<Run> GenerateRuns(const ExperimentConfig& config) {
  struct Job {
    std::uint64_t landscape_seed;
    int index;
  };
  std::vector<Job> jobs;
  for (std::uint64_t s : config.archive_seeds) {
    for (int i = 0; i < config.runs_per_landscape; ++i) jobs.push_back({s, i});
  }
  std::vector<Run> runs(jobs.size());
  const auto count = static_cast<long>(jobs.size());
#pragma omp parallel for schedule(dynamic) if (config.parallel)
  for (long k = 0; k < count; ++k) {
    const Job& job = jobs[k];
    SurrogateLandscape land(job.landscape_seed, config.landscape);
    Run& run = runs[k];
    run.run_id = ProblemId(job.landscape_seed) + "/run-" +
                 std::to_string(job.index);
    const std::string problem = ProblemId(job.landscape_seed);
    Rng rng = StreamRng(config.seed, run.run_id, 0);
    Population init =
        InitPopulation(InitStrategy::kRandom, config.ea.population, {}, land, rng);
    SimpleEa(land, std::move(init), config.ea, rng,
             [&](int, const Population& pop) {
               for (std::size_t m = 0; m < pop.size(); ++m) {
                 run.individuals.push_back(
                     {pop.members[m], pop.fitness[m], run.run_id, problem});
               }
             });
  }
  return runs;
}

void WriteArchive(std::ostream& out, const std::vector<Run>& runs,
                  const GenotypeConfig& config) {
  WriteArchiveHeader(out, config);
  for (const Run& run : runs) {
    for (const Individual& ind : run.individuals) {
      WriteArchiveRecord(out, ind, config);
    }
  }
}

RunArchive ArchiveFromRuns(const std::vector<Run>& runs,
                           const GenotypeConfig& config) {
  std::stringstream buf;
  WriteArchive(buf, runs, config);
  return ParseArchive(buf, config);
}

RunArchive TrainingArchive(const RunArchive& archive,
                           const ExperimentConfig& config) {
  if (config.train_seeds.empty()) return archive;
  RunArchive out = archive;
  out.runs.clear();
  for (const Run& run : archive.runs) {
    if (run.individuals.empty()) continue;
    const std::string& problem = run.individuals.front().problem_id;
    for (std::uint64_t s : config.train_seeds) {
      if (problem == ProblemId(s)) {
        out.runs.push_back(run);
        break;
      }
    }
  }
  if (out.runs.empty()) {
    throw ValidationError("no archive runs belong to the training problems");
  }
  return out;
}

Metamodel TrainMetamodel(const EliteSets& sets, const ExperimentConfig& config) {
  MetamodelConfig mc = config.metamodel;
  mc.genotype = config.landscape.genotype;
  if (config.uniform_metamodel) return Metamodel::Uniform(mc);
  Json provenance{{"archive_hash", HexDigest(sets.archive_hash)},
                  {"n", sets.n},
                  {"seed", sets.seed}};
  return Learn(sets.first, mc, std::move(provenance));
}

LikelihoodResult RunLikelihood(const RunArchive& archive,
                               const ExperimentConfig& config) {
  LikelihoodResult r;
  r.sets = ExtractSets(TrainingArchive(archive, config), config.n, config.seed);
  Metamodel mm = TrainMetamodel(r.sets, config);
  const std::vector<Individual>* sets[] = {&r.sets.first, &r.sets.second,
                                           &r.sets.random};
  for (int s = 0; s < 3; ++s) {
    std::vector<GanSpec> gans;
    for (const Individual& ind : *sets[s]) gans.push_back(ind.gan);
    std::vector<ScoreResult> scores = ScoreBatch(mm, gans);
    for (std::size_t i = 0; i < gans.size(); ++i) {
      const Individual& ind = (*sets[s])[i];
      r.rows.push_back({kSetNames[s], ind.run_id, DepthKeyOf(ind.gan),
                        ind.fitness, scores[i]});
    }
  }

  for (DepthKey key : config.landscape.genotype.DepthKeys()) {
    KeyTest t;
    t.key = key;
    std::vector<double> groups[3];
    for (const LikelihoodRow& row : r.rows) {
      if (row.key != key) continue;
      int s = row.set == kSetNames[0] ? 0 : row.set == kSetNames[1] ? 1 : 2;
      groups[s].push_back(row.score.log_prob);
    }
    std::vector<std::vector<double>> present;
    int total = 0;
    for (int s = 0; s < 3; ++s) {
      t.sizes[s] = static_cast<int>(groups[s].size());
      total += t.sizes[s];
      if (!groups[s].empty()) present.push_back(groups[s]);
    }
    std::fill(std::begin(t.dunn_raw), std::end(t.dunn_raw),
              std::numeric_limits<double>::quiet_NaN());
    std::fill(std::begin(t.dunn_bonferroni), std::end(t.dunn_bonferroni),
              std::numeric_limits<double>::quiet_NaN());
    t.tested = total >= config.min_scored && present.size() >= 2;
    if (t.tested) {
      t.kw = KruskalWallis(present);
      if (present.size() == 3) {
        DunnResult d = Dunn(present);
        const int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
        for (int p = 0; p < 3; ++p) {
          t.dunn_raw[p] = d.p_raw[pairs[p][0]][pairs[p][1]];
          t.dunn_bonferroni[p] = d.p_bonferroni[pairs[p][0]][pairs[p][1]];
        }
      }
    }
    r.tests.push_back(t);
  }
  return r;
}

void WriteLikelihoodCsv(std::ostream& out, const LikelihoodResult& r) {
  out << "set,run_id,depth_key,fitness,log_prob,normalized,supermodel_term,"
         "submodel_term\n";
  for (const LikelihoodRow& row : r.rows) {
    out << row.set << ',' << row.run_id << ',' << DepthKeyLabel(row.key) << ','
        << FormatDouble(row.fitness) << ',' << FormatDouble(row.score.log_prob)
        << ',' << FormatDouble(row.score.normalized) << ','
        << FormatDouble(row.score.supermodel_term) << ','
        << FormatDouble(row.score.submodel_term) << '\n';
  }
}

void WriteLikelihoodTests(std::ostream& out, const LikelihoodResult& r) {
  out << "depth_key,n_first,n_second,n_random,tested,kw_h,kw_p,"
         "dunn_first_second,dunn_first_random,dunn_second_random,"
         "bonf_first_second,bonf_first_random,bonf_second_random\n";
  for (const KeyTest& t : r.tests) {
    out << DepthKeyLabel(t.key) << ',' << t.sizes[0] << ',' << t.sizes[1]
        << ',' << t.sizes[2] << ',' << (t.tested ? 1 : 0) << ',';
    if (t.tested) {
      out << FormatDouble(t.kw.statistic) << ',' << FormatDouble(t.kw.p_value);
    } else {
      out << ',';
    }
    for (double p : t.dunn_raw) out << ',' << FormatOptional(p);
    for (double p : t.dunn_bonferroni) out << ',' << FormatOptional(p);
    out << '\n';
  }
}

SamplingResult RunSampling(const RunArchive& archive,
                           const ExperimentConfig& config) {
  EliteSets sets =
      ExtractSets(TrainingArchive(archive, config), config.n, config.seed);
  Metamodel mm = TrainMetamodel(sets, config);
  const GenotypeConfig& g = config.landscape.genotype;
  const std::size_t h = config.holdout_seeds.size();
  std::vector<std::vector<SamplingRow>> per_holdout(h);
  std::vector<SamplingTest> tests(h);
  const auto count = static_cast<long>(h);
#pragma omp parallel for schedule(dynamic) if (config.parallel)
  for (long k = 0; k < count; ++k) {
    const std::uint64_t seed = config.holdout_seeds[k];
    SurrogateLandscape land(seed, config.landscape);
    std::vector<double> fit[3];
    for (int s = 0; s < 3; ++s) {
      Rng rng = StreamRng(config.seed, kSamplingSets[s], seed);
      for (int i = 0; i < config.samples; ++i) {
        GanSpec gan;
        if (s == 0) {
          gan = mm.Sample(rng);
        } else if (s == 1) {
          gan = sets.first[UniformIndex(rng, sets.first.size())].gan;
        } else {
          gan = RandomGan(g, rng);
        }
        double f = land.Evaluate(gan);
        fit[s].push_back(f);
        per_holdout[k].push_back({seed, kSamplingSets[s], i, DepthKeyOf(gan), f});
      }
    }
    SamplingTest& t = tests[k];
    t.landscape_seed = seed;
    for (int s = 0; s < 3; ++s) {
      double sum = 0.0;
      for (double f : fit[s]) sum += f;
      t.mean[s] = sum / static_cast<double>(fit[s].size());
    }
    t.sampled_vs_random = RankSum(fit[0], fit[2]);
    t.sampled_vs_first = RankSum(fit[0], fit[1]);
  }
  SamplingResult r;
  for (auto& rows : per_holdout) {
    r.rows.insert(r.rows.end(), rows.begin(), rows.end());
  }
  r.tests = std::move(tests);
  return r;
}

void WriteSamplingCsv(std::ostream& out, const SamplingResult& r) {
  out << "landscape_seed,set,index,depth_key,fitness\n";
  for (const SamplingRow& row : r.rows) {
    out << row.landscape_seed << ',' << row.set << ',' << row.index << ','
        << DepthKeyLabel(row.key) << ',' << FormatDouble(row.fitness) << '\n';
  }
}

void WriteSamplingTests(std::ostream& out, const SamplingResult& r) {
  out << "landscape_seed,mean_sampled,mean_first,mean_random,"
         "u_sampled_random,p_sampled_random,u_sampled_first,p_sampled_first\n";
  for (const SamplingTest& t : r.tests) {
    out << t.landscape_seed << ',' << FormatDouble(t.mean[0]) << ','
        << FormatDouble(t.mean[1]) << ',' << FormatDouble(t.mean[2]) << ','
        << FormatDouble(t.sampled_vs_random.statistic) << ','
        << FormatDouble(t.sampled_vs_random.p_value) << ','
        << FormatDouble(t.sampled_vs_first.statistic) << ','
        << FormatDouble(t.sampled_vs_first.p_value) << '\n';
  }
}

InitializationResult RunInitialization(const RunArchive& archive,
                                       const ExperimentConfig& config) {
  EliteSets sets =
      ExtractSets(TrainingArchive(archive, config), config.n, config.seed);
  Metamodel mm = TrainMetamodel(sets, config);
  SurrogateLandscape land(config.target_seed, config.landscape);
  InitSource source{&sets.first, &mm};
  constexpr int kStrategies = std::size(kInitStrategies);
  InitializationResult r;
  r.best.assign(kStrategies,
                std::vector<std::vector<double>>(config.replicates));
  const long jobs = static_cast<long>(kStrategies) * config.replicates;
#pragma omp parallel for schedule(dynamic) if (config.parallel)
  for (long k = 0; k < jobs; ++k) {
    const int s = static_cast<int>(k / config.replicates);
    const int rep = static_cast<int>(k % config.replicates);
    Rng rng = StreamRng(config.seed, InitStrategyName(kInitStrategies[s]),
                        static_cast<std::uint64_t>(rep));
    Population init = InitPopulation(kInitStrategies[s], config.ea.population,
                                     source, land, rng);
    r.best[s][rep] = SimpleEa(land, std::move(init), config.ea, rng);
  }
  return r;
}

void WriteInitializationCsv(std::ostream& out, const InitializationResult& r,
                            const ExperimentConfig& config) {
  out << "replicate,strategy,generation,best\n";
  for (int rep = 0; rep < config.replicates; ++rep) {
    for (std::size_t s = 0; s < r.best.size(); ++s) {
      const std::vector<double>& trace = r.best[s][rep];
      for (std::size_t gen = 0; gen < trace.size(); ++gen) {
        out << rep << ',' << InitStrategyName(kInitStrategies[s]) << ',' << gen
            << ',' << FormatDouble(trace[gen]) << '\n';
      }
    }
  }
}

const char* SearchAlgoName(SearchAlgo a) {
  return a == SearchAlgo::kRandomHc ? "random-hc" : "guided-hc";
}

SearchAlgo ParseSearchAlgo(const std::string& name) {
  if (name == "random-hc") return SearchAlgo::kRandomHc;
  if (name == "guided-hc") return SearchAlgo::kGuidedHc;
  throw ValidationError("unknown search algorithm '" + name + "'");
}

std::vector<SearchTrace> RunSearches(SearchAlgo algo,
                                     const SurrogateLandscape& landscape,
                                     const Metamodel* metamodel,
                                     const std::vector<std::uint64_t>& seeds,
                                     int budget, bool parallel) {
  if (algo == SearchAlgo::kGuidedHc && metamodel == nullptr) {
    throw ValidationError("guided search needs a metamodel");
  }
  if (budget < 1) throw ValidationError("budget must be >= 1");
  const GenotypeConfig& g = landscape.config().genotype;
  std::vector<SearchTrace> traces(seeds.size());
  const auto count = static_cast<long>(seeds.size());
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (long k = 0; k < count; ++k) {
    Rng start_rng = StreamRng(seeds[k], "start", 0);
    GanSpec start = MinimalStart(g, start_rng);
    Rng rng = StreamRng(seeds[k], SearchAlgoName(algo), 0);
    traces[k] = algo == SearchAlgo::kRandomHc
                    ? RandomHc(landscape, start, budget, rng)
                    : GuidedHc(landscape, *metamodel, start, budget, rng);
  }
  return traces;
}

void WriteTraceCsv(std::ostream& out, const std::vector<SearchTrace>& traces,
                   const std::vector<std::uint64_t>& seeds, const char* algo) {
  for (std::size_t k = 0; k < traces.size(); ++k) {
    const std::vector<SearchStep>& steps = traces[k].steps;
    for (std::size_t i = 0; i < steps.size(); ++i) {
      if (algo != nullptr) out << algo << ',';
      out << seeds[k] << ',' << i + 1 << ',' << FormatDouble(steps[i].fitness)
          << ',' << FormatDouble(steps[i].best) << ','
          << (steps[i].accepted ? 1 : 0) << '\n';
    }
  }
}

GuidedSearchResult RunGuidedSearch(const RunArchive& archive,
                                   const ExperimentConfig& config) {
  EliteSets sets =
      ExtractSets(TrainingArchive(archive, config), config.n, config.seed);
  Metamodel mm = TrainMetamodel(sets, config);
  SurrogateLandscape land(config.target_seed, config.landscape);
  GuidedSearchResult r;
  for (int i = 0; i < config.replicates; ++i) {
    r.seeds.push_back(config.seed + static_cast<std::uint64_t>(i));
  }
  r.random = RunSearches(SearchAlgo::kRandomHc, land, nullptr, r.seeds,
                         config.budget, config.parallel);
  r.guided = RunSearches(SearchAlgo::kGuidedHc, land, &mm, r.seeds,
                         config.budget, config.parallel);
  return r;
}

void WriteGuidedCsv(std::ostream& out, const GuidedSearchResult& r) {
  out << "algo,seed,step,fitness,best,accepted\n";
  WriteTraceCsv(out, r.random, r.seeds, SearchAlgoName(SearchAlgo::kRandomHc));
  WriteTraceCsv(out, r.guided, r.seeds, SearchAlgoName(SearchAlgo::kGuidedHc));
}

double BestAt(const SearchTrace& trace, int step) {
  if (step <= 0 || trace.steps.empty()) return trace.start_fitness;
  std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(step),
                                        trace.steps.size());
  return trace.steps[i - 1].best;
}

double Median(std::vector<double> v) {
  if (v.empty()) throw ValidationError("median of an empty list");
  std::sort(v.begin(), v.end());
  std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace archsmith
