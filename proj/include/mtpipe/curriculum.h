//
// Copyright 2026 The mtpipe Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef MTPIPE_CURRICULUM_H_
#define MTPIPE_CURRICULUM_H_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mtpipe/corpus.h"
#include "mtpipe/translator.h"

namespace mtpipe {

// Domain-feature difficulty of one pair:
//   q = (logprob_in - logprob_out) / target_token_count
// Higher q means more in-domain (easier for the target domain). Natural
// logs throughout.
struct DifficultyScore {
  double q = 0.0;
  double logprob_in = 0.0;
  double logprob_out = 0.0;
  int64_t target_token_count = 0;
};

DifficultyScore difficulty_from_scores(double logprob_in, double logprob_out,
                                       int64_t target_token_count);

// Scores one pair with an in-domain and an out-domain model. Throws
// ScoreError when the target has no tokens.
DifficultyScore domain_feature(const SentencePair& pair,
                               const Scorer& in_scorer,
                               const Scorer& out_scorer);

std::vector<DifficultyScore> domain_features(
    const std::vector<SentencePair>& pairs, const Scorer& in_scorer,
    const Scorer& out_scorer, int jobs = 1);

// Quantile buckets over q plus the per-phase bin-weight schedule. Bins hold
// record indices, partition the corpus, and are ordered from highest q
// (bin 0, most in-domain) downward.
struct CurriculumBins {
  std::vector<std::vector<size_t>> bins;
  // Per bin: [highest q, lowest q] of its members.
  std::vector<std::pair<double, double>> q_ranges;
  // One weight vector per phase; each sums to 1.
  std::vector<std::vector<double>> schedule;

  nlohmann::json to_json() const;
  static CurriculumBins from_json(const nlohmann::json& j);
  void save(const std::string& path) const;
  static CurriculumBins load(const std::string& path);
};

// Phase weights easing from all-mass-on-bin-0 to uniform across phases.
std::vector<std::vector<double>> default_schedule(int num_bins,
                                                  int num_phases = 4);

// Splits records into num_bins quantile bins by descending q (ties keep
// input order); bin sizes differ by at most one. Attaches default_schedule
// weights. Throws ConfigError when num_bins < 1 or exceeds the record count.
CurriculumBins build_bins(const std::vector<DifficultyScore>& scores,
                          int num_bins);

struct SampleOptions {
  int phase = 0;
  int batch_size = 1;
  int num_batches = 1;
  uint64_t seed = 0;
  // When set, records inside a bin are drawn by cycling a seeded shuffle
  // instead of independently, so a bin's records are covered evenly.
  bool epoch_coverage = false;
};

// Draws mini-batches of record indices: each draw picks bin b with
// probability schedule[phase][b], then a record uniformly from that bin
// (with replacement across the stream). Records inside a batch are ordered
// by target token count (ties by index) for length bucketing. scores must
// align with the indices stored in the bins.
std::vector<std::vector<size_t>> cl_sample(
    const CurriculumBins& bins, const std::vector<DifficultyScore>& scores,
    const SampleOptions& options);

// External per-record scores: "index<TAB>logprob_in<TAB>logprob_out" rows
// that must exactly cover indices 0..expected_count-1. Missing or duplicate
// indices raise FormatError naming the offenders.
std::vector<std::pair<double, double>> load_external_scores(
    const std::string& path, size_t expected_count);

void save_external_scores(
    const std::string& path,
    const std::vector<std::pair<double, double>>& scores);

}  // namespace mtpipe

#endif  // MTPIPE_CURRICULUM_H_
