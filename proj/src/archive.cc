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

#include "archsmith/archive.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace archsmith {

namespace {

struct RawRecord {
  std::size_t line = 0;
  Json json;
};

// Collects raw continuous values so that one quantile scheme is fitted per
// attribute across the whole archive.
void CollectContinuous(const Json& gan, std::vector<double>& sizes,
                       std::vector<double>& freqs) {
  if (!gan.is_object()) return;
  if (!gan.contains("train_freq_bin") && gan.contains("train_freq") &&
      gan["train_freq"].is_number()) {
    freqs.push_back(gan["train_freq"].get<double>());
  }
  for (const char* role : {"generator", "discriminator"}) {
    if (!gan.contains(role) || !gan[role].is_array()) continue;
    for (const Json& layer : gan[role]) {
      if (layer.is_object() && !layer.contains("size_bin") &&
          layer.contains("neurons") && layer["neurons"].is_number()) {
        sizes.push_back(layer["neurons"].get<double>());
      }
    }
  }
}

std::string LineError(std::size_t line, const std::string& what) {
  return "line " + std::to_string(line) + ": " + what;
}

}  // namespace

std::size_t RunArchive::NumIndividuals() const {
  std::size_t n = 0;
  for (const Run& r : runs) n += r.individuals.size();
  return n;
}

Json IndividualToJson(const Individual& ind, const GenotypeConfig& config) {
  return Json{{"run_id", ind.run_id},
              {"problem_id", ind.problem_id},
              {"fitness", ind.fitness},
              {"gan", GanToJson(ind.gan, config)}};
}

Individual IndividualFromJson(const Json& j, const GenotypeConfig& config,
                              const ContinuousSchemes* schemes) {
  if (!j.is_object()) throw ValidationError("record is not an object");
  Individual ind;
  try {
    ind.run_id = j.at("run_id").is_string()
                     ? j.at("run_id").get<std::string>()
                     : j.at("run_id").dump();
    ind.problem_id = j.contains("problem_id")
                         ? (j.at("problem_id").is_string()
                                ? j.at("problem_id").get<std::string>()
                                : j.at("problem_id").dump())
                         : std::string();
    ind.fitness = j.at("fitness").get<double>();
    ind.gan = GanFromJson(j.at("gan"), config, schemes);
  } catch (const Json::exception& e) {
    throw ValidationError(e.what());
  }
  if (!std::isfinite(ind.fitness)) throw ValidationError("fitness not finite");
  return ind;
}

void WriteArchiveHeader(std::ostream& out, const GenotypeConfig& config) {
  out << Json{{"format", "archive-v1"}, {"config", config.ToJson()}}.dump()
      << '\n';
}

void WriteArchiveRecord(std::ostream& out, const Individual& ind,
                        const GenotypeConfig& config) {
  out << IndividualToJson(ind, config).dump() << '\n';
}

RunArchive ParseArchive(std::istream& in, const GenotypeConfig& config) {
  RunArchive archive;
  archive.config = config;
  Fnv1a content;
  std::vector<RawRecord> raw;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    content.Add(text);
    content.Add(std::string_view("\n"));
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json j = Json::parse(text, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) {
      archive.diagnostics.push_back(LineError(line, "malformed JSON"));
      continue;
    }
    if (j.is_object() && j.value("format", std::string()) == "archive-v1") {
      try {
        archive.config = GenotypeConfig::FromJson(j.at("config"));
      } catch (const std::exception& e) {
        throw ValidationError(LineError(line, e.what()));
      }
      continue;
    }
    raw.push_back({line, std::move(j)});
  }
  archive.content_hash = content.Digest();

  std::vector<double> sizes, freqs;
  for (const RawRecord& r : raw) {
    if (r.json.is_object() && r.json.contains("gan")) {
      CollectContinuous(r.json["gan"], sizes, freqs);
    }
  }
  if (!sizes.empty()) {
    archive.schemes.layer_size =
        FitDiscretization(sizes, archive.config.size_bins);
  }
  if (!freqs.empty()) {
    archive.schemes.train_freq =
        FitDiscretization(freqs, archive.config.train_freq_bins);
  }

  std::map<std::string, Run> runs;
  for (const RawRecord& r : raw) {
    try {
      Individual ind =
          IndividualFromJson(r.json, archive.config, &archive.schemes);
      Run& run = runs[ind.run_id];
      run.run_id = ind.run_id;
      run.individuals.push_back(std::move(ind));
    } catch (const ValidationError& e) {
      ++archive.rejected_records;
      archive.diagnostics.push_back(LineError(r.line, e.what()));
    }
  }
  if (runs.empty()) throw ValidationError("no runs");
  for (auto& [id, run] : runs) archive.runs.push_back(std::move(run));
  return archive;
}

RunArchive LoadArchive(const std::string& path, const GenotypeConfig& config) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open archive " + path);
  return ParseArchive(in, config);
}

EliteSets ExtractSets(const RunArchive& archive, int n, std::uint64_t seed) {
  if (n < 1) throw ValidationError("n must be >= 1");
  EliteSets sets;
  sets.n = n;
  sets.seed = seed;
  sets.config = archive.config;
  sets.archive_hash = archive.content_hash;
  const auto un = static_cast<std::size_t>(n);
  for (const Run& run : archive.runs) {
    std::unordered_map<std::uint64_t, std::size_t> index;
    std::vector<std::pair<std::uint64_t, const Individual*>> distinct;
    for (const Individual& ind : run.individuals) {
      std::uint64_t h = GenotypeHash(ind.gan);
      auto [it, inserted] = index.emplace(h, distinct.size());
      if (inserted) {
        distinct.emplace_back(h, &ind);
      } else if (ind.fitness < distinct[it->second].second->fitness) {
        distinct[it->second].second = &ind;
      }
    }
    if (distinct.size() < 2 * un) {
      throw ValidationError("run '" + run.run_id + "' has " +
                            std::to_string(distinct.size()) +
                            " distinct individuals, need " +
                            std::to_string(2 * un));
    }
    std::sort(distinct.begin(), distinct.end(),
              [](const auto& a, const auto& b) {
                if (a.second->fitness != b.second->fitness) {
                  return a.second->fitness < b.second->fitness;
                }
                return a.first < b.first;
              });
    std::unordered_set<std::uint64_t> elite;
    for (std::size_t r = 0; r < 2 * un; ++r) {
      (r < un ? sets.first : sets.second).push_back(*distinct[r].second);
      elite.insert(distinct[r].first);
    }
    Fnv1a run_hash;
    run_hash.Add(run.run_id);
    Rng rng(Mix64(seed) ^ run_hash.Digest());
    std::vector<std::size_t> pool(distinct.size());
    for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
    for (std::size_t k = 0; k < un; ++k) {
      std::size_t pick = k + UniformIndex(rng, pool.size() - k);
      std::swap(pool[k], pool[pick]);
      const auto& chosen = distinct[pool[k]];
      sets.random.push_back(*chosen.second);
      if (elite.count(chosen.first)) ++sets.random_overlap;
    }
  }
  return sets;
}

FilterResult FilterDepths(const std::vector<Individual>& set,
                          const std::set<DepthKey>& allowed) {
  FilterResult out;
  for (const Individual& ind : set) {
    if (allowed.count(DepthKeyOf(ind.gan))) out.individuals.push_back(ind);
  }
  out.retained_fraction =
      set.empty() ? 0.0
                  : static_cast<double>(out.individuals.size()) /
                        static_cast<double>(set.size());
  return out;
}

Json SetsToJson(const EliteSets& sets) {
  auto list = [&](const std::vector<Individual>& v) {
    Json arr = Json::array();
    for (const Individual& ind : v) {
      arr.push_back(IndividualToJson(ind, sets.config));
    }
    return arr;
  };
  return Json{{"format", "sets-v1"},
              {"n", sets.n},
              {"seed", sets.seed},
              {"archive_hash", HexDigest(sets.archive_hash)},
              {"config", sets.config.ToJson()},
              {"random_overlap", sets.random_overlap},
              {"first", list(sets.first)},
              {"second", list(sets.second)},
              {"random", list(sets.random)}};
}

EliteSets SetsFromJson(const Json& j) {
  try {
    if (j.at("format").get<std::string>() != "sets-v1") {
      throw ValidationError("unsupported sets format");
    }
    EliteSets sets;
    sets.n = j.at("n").get<int>();
    sets.seed = j.at("seed").get<std::uint64_t>();
    sets.archive_hash =
        std::stoull(j.at("archive_hash").get<std::string>(), nullptr, 16);
    sets.config = GenotypeConfig::FromJson(j.at("config"));
    sets.random_overlap = j.value("random_overlap", std::size_t{0});
    for (const Json& r : j.at("first")) {
      sets.first.push_back(IndividualFromJson(r, sets.config));
    }
    for (const Json& r : j.at("second")) {
      sets.second.push_back(IndividualFromJson(r, sets.config));
    }
    for (const Json& r : j.at("random")) {
      sets.random.push_back(IndividualFromJson(r, sets.config));
    }
    return sets;
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("corrupt sets file: ") + e.what());
  }
}

EliteSets LoadSets(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open sets file " + path);
  Json j = Json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw ValidationError("sets file is not valid JSON");
  return SetsFromJson(j);
}

void SaveSets(const EliteSets& sets, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << SetsToJson(sets).dump(1) << '\n';
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace archsmith
