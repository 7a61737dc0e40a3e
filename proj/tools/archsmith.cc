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

// archsmith: learn metamodels from architecture-search archives and run the
// scoring, sampling and search experiments on synthetic landscapes.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "archsmith/archive.h"
#include "archsmith/experiments.h"
#include "archsmith/metamodel.h"
#include "archsmith/search.h"
#include "archsmith/stats.h"

namespace {

using namespace archsmith;

struct Globals {
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string config_path;
  std::string out;
};

Json ReadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  Json j = Json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw ValidationError(path + ": malformed JSON");
  return j;
}

ExperimentConfig LoadConfig(const Globals& g) {
  ExperimentConfig c = g.config_path.empty()
                           ? ExperimentConfig{}
                           : ExperimentConfig::FromJson(ReadJsonFile(g.config_path));
  if (g.seed_set) c.seed = g.seed;
  c.metamodel.genotype = c.landscape.genotype;
  return c;
}

// Writes to the --out file, or stdout when none was given.
class Output {
 public:
  explicit Output(const std::string& path) : path_(path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw IoError("cannot write " + path);
    }
  }
  std::ostream& stream() { return path_.empty() ? std::cout : file_; }
  void Close() {
    if (path_.empty()) {
      std::cout.flush();
      return;
    }
    file_.close();
    if (!file_) throw IoError("failed writing " + path_);
  }

 private:
  std::string path_;
  std::ofstream file_;
};

void WriteFile(const std::string& path,
               const std::function<void(std::ostream&)>& body) {
  Output out(path);
  body(out.stream());
  out.Close();
}

std::string RequireOut(const Globals& g, const char* what) {
  if (g.out.empty()) throw ValidationError(std::string(what) + " needs --out");
  return g.out;
}

// "0..29" or "1,2,5".
std::vector<std::uint64_t> ParseSeeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  try {
    auto dots = text.find("..");
    if (dots != std::string::npos) {
      std::uint64_t lo = std::stoull(text.substr(0, dots));
      std::uint64_t hi = std::stoull(text.substr(dots + 2));
      if (hi < lo) throw ValidationError("empty seed range " + text);
      for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
    } else {
      std::stringstream ss(text);
      std::string item;
      while (std::getline(ss, item, ',')) seeds.push_back(std::stoull(item));
    }
  } catch (const std::logic_error&) {
    throw ValidationError("bad seed list '" + text + "'");
  }
  if (seeds.empty()) throw ValidationError("no seeds given");
  return seeds;
}

// Sibling file for test summaries: out.csv -> out.tests.csv.
std::string TestsPath(const std::string& out) {
  std::filesystem::path p(out);
  std::string stem = p.extension() == ".csv" ? p.stem().string() : p.filename().string();
  return (p.parent_path() / (stem + ".tests.csv")).string();
}

std::vector<std::string> SplitCsv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

int Ingest(const Globals& g, const std::string& archive_path, int n) {
  ExperimentConfig c = LoadConfig(g);
  RunArchive archive = LoadArchive(archive_path, c.landscape.genotype);
  for (const std::string& d : archive.diagnostics) {
    std::cerr << archive_path << ": " << d << '\n';
  }
  EliteSets sets = ExtractSets(archive, n, c.seed);
  WriteFile(RequireOut(g, "ingest"), [&](std::ostream& out) {
    out << SetsToJson(sets).dump(1) << '\n';
  });
  std::cerr << "runs " << archive.runs.size() << ", first " << sets.first.size()
            << ", second " << sets.second.size() << ", random "
            << sets.random.size() << " (overlap " << sets.random_overlap
            << "), rejected records " << archive.rejected_records << '\n';
  return 0;
}

int LearnCmd(const Globals& g, const std::string& sets_path) {
  ExperimentConfig c = LoadConfig(g);
  EliteSets sets = LoadSets(sets_path);
  MetamodelConfig mc = c.metamodel;
  mc.genotype = sets.config;
  Json provenance{{"archive_hash", HexDigest(sets.archive_hash)},
                  {"n", sets.n},
                  {"seed", sets.seed},
                  {"sets", sets_path}};
  Metamodel m = Learn(sets.first, mc, std::move(provenance));
  SaveMetamodel(m, RequireOut(g, "learn"));
  std::cerr << "submodels " << m.submodels().size() << ", training individuals "
            << sets.first.size() << '\n';
  return 0;
}

std::vector<GanSpec> ReadGans(const std::string& path,
                              const GenotypeConfig& config) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<GanSpec> gans;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json j = Json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw ValidationError(path + ":" + std::to_string(number) +
                            ": malformed JSON");
    }
    if (j.is_object() && j.contains("format")) continue;  // archive header
    gans.push_back(GanFromJson(j.contains("gan") ? j.at("gan") : j, config));
  }
  return gans;
}

int Score(const Globals& g, const std::string& model_path,
          const std::string& gan_path) {
  Metamodel m = LoadMetamodel(model_path);
  if (!g.config_path.empty()) {
    if (auto warning = ProvenanceWarning(m, LoadConfig(g).landscape.genotype)) {
      std::cerr << "warning: " << *warning << '\n';
    }
  }
  std::vector<GanSpec> gans = ReadGans(gan_path, m.genotype_config());
  std::vector<ScoreResult> scores = ScoreBatch(m, gans);
  WriteFile(g.out, [&](std::ostream& out) {
    out << "index,depth_key,log_prob,normalized,supermodel_term,submodel_term\n";
    for (std::size_t i = 0; i < scores.size(); ++i) {
      out << i << ',' << DepthKeyLabel(DepthKeyOf(gans[i])) << ','
          << FormatDouble(scores[i].log_prob) << ','
          << FormatDouble(scores[i].normalized) << ','
          << FormatDouble(scores[i].supermodel_term) << ','
          << FormatDouble(scores[i].submodel_term) << '\n';
    }
  });
  return 0;
}

int SampleCmd(const Globals& g, const std::string& model_path, int count) {
  if (count < 1) throw ValidationError("count must be >= 1");
  Metamodel m = LoadMetamodel(model_path);
  Rng rng(Mix64(g.seed));
  WriteFile(g.out, [&](std::ostream& out) {
    for (int i = 0; i < count; ++i) {
      out << GanToJson(m.Sample(rng), m.genotype_config()).dump() << '\n';
    }
  });
  return 0;
}

int Search(const Globals& g, const std::string& algo_name,
           const std::string& model_path, std::uint64_t landscape_seed,
           int budget, const std::string& seeds_text) {
  ExperimentConfig c = LoadConfig(g);
  SearchAlgo algo = ParseSearchAlgo(algo_name);
  std::optional<Metamodel> m;
  if (!model_path.empty()) {
    m = LoadMetamodel(model_path);
    if (g.config_path.empty()) {
      c.landscape.genotype = m->genotype_config();
    } else if (auto warning = ProvenanceWarning(*m, c.landscape.genotype)) {
      std::cerr << "warning: " << *warning << '\n';
    }
  }
  SurrogateLandscape land(landscape_seed, c.landscape);
  std::vector<std::uint64_t> seeds = ParseSeeds(seeds_text);
  std::vector<SearchTrace> traces = RunSearches(
      algo, land, m ? &*m : nullptr, seeds, budget, c.parallel);
  WriteFile(RequireOut(g, "search"), [&](std::ostream& out) {
    out << "seed,step,fitness,best,accepted\n";
    WriteTraceCsv(out, traces, seeds);
  });
  return 0;
}

int GenArchive(const Globals& g) {
  ExperimentConfig c = LoadConfig(g);
  std::vector<Run> runs = GenerateRuns(c);
  WriteFile(RequireOut(g, "gen-archive"), [&](std::ostream& out) {
    WriteArchive(out, runs, c.landscape.genotype);
  });
  std::cerr << "runs " << runs.size() << '\n';
  return 0;
}

int Experiment(const Globals& g, std::string name,
               const std::string& archive_path) {
  ExperimentConfig c = LoadConfig(g);
  if (!name.empty()) c.experiment = name;
  c.Validate();
  const std::string out = RequireOut(g, "experiment");
  RunArchive archive = LoadArchive(archive_path, c.landscape.genotype);
  if (c.experiment == "likelihood") {
    LikelihoodResult r = RunLikelihood(archive, c);
    WriteFile(out, [&](std::ostream& o) { WriteLikelihoodCsv(o, r); });
    WriteFile(TestsPath(out), [&](std::ostream& o) { WriteLikelihoodTests(o, r); });
  } else if (c.experiment == "sampling") {
    SamplingResult r = RunSampling(archive, c);
    WriteFile(out, [&](std::ostream& o) { WriteSamplingCsv(o, r); });
    WriteFile(TestsPath(out), [&](std::ostream& o) { WriteSamplingTests(o, r); });
  } else if (c.experiment == "initialization") {
    InitializationResult r = RunInitialization(archive, c);
    WriteFile(out, [&](std::ostream& o) { WriteInitializationCsv(o, r, c); });
  } else if (c.experiment == "guided-search") {
    GuidedSearchResult r = RunGuidedSearch(archive, c);
    WriteFile(out, [&](std::ostream& o) { WriteGuidedCsv(o, r); });
  } else {
    throw ValidationError("experiment id missing: set \"experiment\" or --name");
  }
  return 0;
}

int Analyze(const Globals& g, const std::vector<std::string>& traces,
            const std::string& test, const std::string& value_column,
            std::string group_column, const std::vector<std::string>& where) {
  std::map<std::string, std::string> filters;
  for (const std::string& w : where) {
    auto eq = w.find('=');
    if (eq == std::string::npos) throw ValidationError("bad --where " + w);
    filters[w.substr(0, eq)] = w.substr(eq + 1);
  }
  if (group_column.empty() && traces.size() < 2) group_column = "algo";

  std::vector<std::string> names;
  std::map<std::string, std::vector<double>> groups;
  for (const std::string& path : traces) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw ValidationError(path + ": empty file");
    std::vector<std::string> header = SplitCsv(line);
    auto column = [&](const std::string& name) -> std::size_t {
      auto it = std::find(header.begin(), header.end(), name);
      if (it == header.end()) {
        throw ValidationError(path + ": no column '" + name + "'");
      }
      return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t value_col = column(value_column);
    const std::size_t group_col =
        group_column.empty() ? header.size() : column(group_column);
    std::vector<std::pair<std::size_t, std::string>> filter_cols;
    for (const auto& [k, v] : filters) filter_cols.emplace_back(column(k), v);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::vector<std::string> f = SplitCsv(line);
      if (f.size() != header.size()) {
        throw ValidationError(path + ": ragged row");
      }
      bool keep = true;
      for (const auto& [col, v] : filter_cols) keep = keep && f[col] == v;
      if (!keep) continue;
      std::string key = group_col < f.size() ? f[group_col] : path;
      if (!groups.count(key)) names.push_back(key);
      try {
        groups[key].push_back(std::stod(f[value_col]));
      } catch (const std::logic_error&) {
        throw ValidationError(path + ": non-numeric value '" + f[value_col] + "'");
      }
    }
  }
  if (names.size() < 2) throw ValidationError("need at least two groups");
  std::vector<std::vector<double>> data;
  for (const std::string& n : names) data.push_back(groups[n]);

  WriteFile(g.out, [&](std::ostream& out) {
    out << "test,group_a,group_b,n_a,n_b,statistic,p_value,p_bonferroni\n";
    if (test == "kw") {
      TestResult r = KruskalWallis(data);
      out << "kw,all,," << data.size() << ",," << FormatDouble(r.statistic)
          << ',' << FormatDouble(r.p_value) << ",\n";
    } else if (test == "dunn") {
      DunnResult d = Dunn(data);
      for (std::size_t i = 0; i < names.size(); ++i) {
        for (std::size_t j = i + 1; j < names.size(); ++j) {
          out << "dunn," << names[i] << ',' << names[j] << ','
              << data[i].size() << ',' << data[j].size() << ','
              << FormatDouble(d.z[i][j]) << ',' << FormatDouble(d.p_raw[i][j])
              << ',' << FormatDouble(d.p_bonferroni[i][j]) << '\n';
        }
      }
    } else if (test == "ranksum") {
      const double pairs = static_cast<double>(names.size() * (names.size() - 1) / 2);
      for (std::size_t i = 0; i < names.size(); ++i) {
        for (std::size_t j = i + 1; j < names.size(); ++j) {
          TestResult r = RankSum(data[i], data[j]);
          out << "ranksum," << names[i] << ',' << names[j] << ','
              << data[i].size() << ',' << data[j].size() << ','
              << FormatDouble(r.statistic) << ',' << FormatDouble(r.p_value)
              << ',' << FormatDouble(std::min(1.0, r.p_value * pairs)) << '\n';
        }
      }
    } else {
      throw ValidationError("unknown test '" + test + "'");
    }
  });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Metamodels of good GAN architectures from search archives"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Master random seed")
      ->each([&](const std::string&) { g.seed_set = true; });
  app.add_option("--config", g.config_path, "JSON configuration file");
  app.add_option("--out", g.out, "Output path (stdout when omitted)");

  std::string archive_path, sets_path, model_path, gan_path, algo = "random-hc",
              seeds_text = "0..29", name, test = "ranksum", value = "best",
              group;
  std::vector<std::string> traces, where;
  int n = 5, count = 100, budget = 100;
  std::uint64_t landscape_seed = 1001;
  std::function<int()> action;

  auto* ingest = app.add_subcommand("ingest", "Extract First/Second/Random sets");
  ingest->add_option("--archive", archive_path)->required();
  ingest->add_option("--n", n, "Elite set size per run");
  ingest->callback([&] { action = [&] { return Ingest(g, archive_path, n); }; });

  auto* learn = app.add_subcommand("learn", "Learn a metamodel from a First set");
  learn->add_option("--sets", sets_path)->required();
  learn->callback([&] { action = [&] { return LearnCmd(g, sets_path); }; });

  auto* score = app.add_subcommand("score", "Score genotype records");
  score->add_option("--model", model_path)->required();
  score->add_option("--gan", gan_path, "Line-delimited genotype records")
      ->required();
  score->callback([&] { action = [&] { return Score(g, model_path, gan_path); }; });

  auto* sample = app.add_subcommand("sample", "Draw genotypes from a metamodel");
  sample->add_option("--model", model_path)->required();
  sample->add_option("--count", count);
  sample->callback(
      [&] { action = [&] { return SampleCmd(g, model_path, count); }; });

  auto* search = app.add_subcommand("search", "Hill climbing on a landscape");
  search->add_option("--algo", algo, "random-hc or guided-hc");
  search->add_option("--model", model_path);
  search->add_option("--landscape-seed", landscape_seed);
  search->add_option("--budget", budget);
  search->add_option("--seeds", seeds_text, "Range a..b or comma list");
  search->callback([&] {
    action = [&] {
      return Search(g, algo, model_path, landscape_seed, budget, seeds_text);
    };
  });

  auto* gen = app.add_subcommand("gen-archive", "Synthesize an EA run archive");
  gen->callback([&] { action = [&] { return GenArchive(g); }; });

  auto* experiment = app.add_subcommand("experiment", "Run one experiment");
  experiment->add_option("--archive", archive_path)->required();
  experiment->add_option(
      "--name", name, "likelihood, sampling, initialization or guided-search");
  experiment->callback(
      [&] { action = [&] { return Experiment(g, name, archive_path); }; });

  auto* analyze = app.add_subcommand("analyze", "Rank tests over CSV columns");
  analyze->add_option("--traces", traces)->required();
  analyze->add_option("--test", test, "kw, dunn or ranksum");
  analyze->add_option("--value", value, "Numeric column to compare");
  analyze->add_option("--group", group, "Grouping column (default: file)");
  analyze->add_option("--where", where, "Row filter column=value");
  analyze->callback([&] {
    action = [&] { return Analyze(g, traces, test, value, group, where); };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  try {
    return action();
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
