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

#ifndef ARCHSMITH_ARCHIVE_H_
#define ARCHSMITH_ARCHIVE_H_

#include <cstdint>
#include <iosfwd>
#include <set>
#include <string>
#include <vector>

#include "archsmith/genotype.h"

namespace archsmith {

// One evaluated architecture from a past search. Lower fitness is better.
struct Individual {
  GanSpec gan;
  double fitness = 0.0;
  std::string run_id;
  std::string problem_id;
};

struct Run {
  std::string run_id;
  std::vector<Individual> individuals;
};

struct RunArchive {
  GenotypeConfig config;
  ContinuousSchemes schemes;
  std::vector<Run> runs;  // sorted by run_id
  std::vector<std::string> diagnostics;
  std::size_t rejected_records = 0;
  std::uint64_t content_hash = 0;

  std::size_t NumIndividuals() const;
};

// Archive files are line-delimited JSON. An optional first line
// {"format":"archive-v1","config":{...}} overrides `config`. Every other line
// is {"run_id":..,"problem_id":..,"fitness":..,"gan":{...}}. Bad lines are
// skipped and reported in `diagnostics` with their line number. Throws
// ValidationError("no runs") when nothing loads, IoError when unreadable.
RunArchive LoadArchive(const std::string& path, const GenotypeConfig& config);
RunArchive ParseArchive(std::istream& in, const GenotypeConfig& config);

Json IndividualToJson(const Individual& ind, const GenotypeConfig& config);
Individual IndividualFromJson(const Json& j, const GenotypeConfig& config,
                              const ContinuousSchemes* schemes = nullptr);
void WriteArchiveHeader(std::ostream& out, const GenotypeConfig& config);
void WriteArchiveRecord(std::ostream& out, const Individual& ind,
                        const GenotypeConfig& config);

struct EliteSets {
  int n = 0;
  std::uint64_t seed = 0;
  std::vector<Individual> first;   // ranks 1..n of every run
  std::vector<Individual> second;  // ranks n+1..2n
  std::vector<Individual> random;  // n uniform draws per run
  std::size_t random_overlap = 0;  // random members also in first/second
  GenotypeConfig config;
  std::uint64_t archive_hash = 0;
};

// Per run: repeated genotypes collapse to one entry, entries are ranked by
// (fitness, genotype hash), and the random draw is seeded per run from
// (seed, run_id). The result does not depend on record order in the file.
// Throws ValidationError naming the run when it has fewer than 2n distinct
// genotypes.
EliteSets ExtractSets(const RunArchive& archive, int n, std::uint64_t seed);

struct FilterResult {
  std::vector<Individual> individuals;
  double retained_fraction = 0.0;
};

FilterResult FilterDepths(const std::vector<Individual>& set,
                          const std::set<DepthKey>& allowed);

Json SetsToJson(const EliteSets& sets);
EliteSets SetsFromJson(const Json& j);
EliteSets LoadSets(const std::string& path);
void SaveSets(const EliteSets& sets, const std::string& path);

}  // namespace archsmith

#endif  // ARCHSMITH_ARCHIVE_H_
