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

#include "mtpipe/curriculum.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>

#include "mtpipe/error.h"
#include "mtpipe/hash.h"
#include "mtpipe/parallel.h"
#include "mtpipe/rng.h"

namespace mtpipe {

using nlohmann::json;

DifficultyScore difficulty_from_scores(double logprob_in, double logprob_out,
                                       int64_t target_token_count) {
  if (target_token_count < 1) {
    throw ScoreError("difficulty needs a non-empty target");
  }
  DifficultyScore score;
  score.logprob_in = logprob_in;
  score.logprob_out = logprob_out;
  score.target_token_count = target_token_count;
  score.q = (logprob_in - logprob_out) /
            static_cast<double>(target_token_count);
  return score;
}

DifficultyScore domain_feature(const SentencePair& pair,
                               const Scorer& in_scorer,
                               const Scorer& out_scorer) {
  int64_t tokens = static_cast<int64_t>(pair.tgt.token_count());
  if (tokens < 1) throw ScoreError("difficulty needs a non-empty target");
  return difficulty_from_scores(in_scorer.logprob(pair.src, pair.tgt),
                                out_scorer.logprob(pair.src, pair.tgt),
                                tokens);
}

std::vector<DifficultyScore> domain_features(
    const std::vector<SentencePair>& pairs, const Scorer& in_scorer,
    const Scorer& out_scorer, int jobs) {
  std::vector<DifficultyScore> scores(pairs.size());
  parallel_for(pairs.size(), jobs, [&](size_t i) {
    scores[i] = domain_feature(pairs[i], in_scorer, out_scorer);
  });
  return scores;
}

nlohmann::json CurriculumBins::to_json() const {
  json bin_list = json::array();
  for (size_t b = 0; b < bins.size(); ++b) {
    bin_list.push_back(json{{"indices", bins[b]},
                            {"q_max", q_ranges[b].first},
                            {"q_min", q_ranges[b].second}});
  }
  return json{{"bins", bin_list}, {"schedule", schedule}};
}

CurriculumBins CurriculumBins::from_json(const nlohmann::json& j) {
  CurriculumBins bins;
  try {
    for (const auto& entry : j.at("bins")) {
      bins.bins.push_back(entry.at("indices").get<std::vector<size_t>>());
      bins.q_ranges.emplace_back(entry.at("q_max").get<double>(),
                                 entry.at("q_min").get<double>());
    }
    bins.schedule = j.at("schedule").get<std::vector<std::vector<double>>>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad curriculum bins: ") + e.what());
  }
  return bins;
}

void CurriculumBins::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open file for writing: " + path);
  out << to_json().dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

CurriculumBins CurriculumBins::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
  return from_json(j);
}

std::vector<std::vector<double>> default_schedule(int num_bins,
                                                  int num_phases) {
  if (num_bins < 1) throw ConfigError("schedule needs at least one bin");
  if (num_phases < 1) throw ConfigError("schedule needs at least one phase");
  std::vector<std::vector<double>> schedule;
  double uniform = 1.0 / static_cast<double>(num_bins);
  for (int t = 0; t < num_phases; ++t) {
    double mix = num_phases == 1
                     ? 1.0
                     : static_cast<double>(t) /
                           static_cast<double>(num_phases - 1);
    std::vector<double> w(num_bins, mix * uniform);
    w[0] += 1.0 - mix;
    schedule.push_back(std::move(w));
  }
  return schedule;
}

CurriculumBins build_bins(const std::vector<DifficultyScore>& scores,
                          int num_bins) {
  if (num_bins < 1) throw ConfigError("bins: need at least one bin");
  if (static_cast<size_t>(num_bins) > scores.size()) {
    throw ConfigError("bins: " + std::to_string(num_bins) +
                      " bins exceed " + std::to_string(scores.size()) +
                      " records");
  }
  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return scores[a].q > scores[b].q;
  });

  CurriculumBins result;
  size_t base = scores.size() / num_bins;
  size_t remainder = scores.size() % num_bins;
  size_t cursor = 0;
  for (int b = 0; b < num_bins; ++b) {
    size_t size = base + (static_cast<size_t>(b) < remainder ? 1 : 0);
    std::vector<size_t> bin(order.begin() + cursor,
                            order.begin() + cursor + size);
    cursor += size;
    result.q_ranges.emplace_back(scores[bin.front()].q,
                                 scores[bin.back()].q);
    result.bins.push_back(std::move(bin));
  }
  result.schedule = default_schedule(num_bins);
  return result;
}

std::vector<std::vector<size_t>> cl_sample(
    const CurriculumBins& bins, const std::vector<DifficultyScore>& scores,
    const SampleOptions& options) {
  if (options.batch_size < 1) {
    throw ConfigError("sample: batch_size must be >= 1");
  }
  if (options.num_batches < 0) {
    throw ConfigError("sample: num_batches must be >= 0");
  }
  if (options.phase < 0 ||
      static_cast<size_t>(options.phase) >= bins.schedule.size()) {
    throw ConfigError("sample: phase " + std::to_string(options.phase) +
                      " outside schedule of " +
                      std::to_string(bins.schedule.size()) + " phases");
  }
  const std::vector<double>& weights = bins.schedule[options.phase];
  if (weights.size() != bins.bins.size()) {
    throw ConfigError("sample: weight vector length does not match bin count");
  }
  double weight_sum = 0.0;
  for (size_t b = 0; b < weights.size(); ++b) {
    if (weights[b] < 0.0) {
      throw ConfigError("sample: negative bin weight");
    }
    if (weights[b] > 0.0 && bins.bins[b].empty()) {
      throw ConfigError("sample: positive weight on empty bin " +
                        std::to_string(b));
    }
    weight_sum += weights[b];
  }
  if (weight_sum <= 0.0) throw ConfigError("sample: all-zero weight vector");
  for (const auto& bin : bins.bins) {
    for (size_t index : bin) {
      if (index >= scores.size()) {
        throw InputError("sample: bin index " + std::to_string(index) +
                         " has no score");
      }
    }
  }

  Rng rng(options.seed);

  // Per-bin cycling shuffles for epoch-coverage mode.
  std::vector<std::vector<size_t>> queues(bins.bins.size());
  std::vector<size_t> queue_pos(bins.bins.size(), 0);

  auto draw_from_bin = [&](size_t b) -> size_t {
    const auto& bin = bins.bins[b];
    if (!options.epoch_coverage) {
      return bin[rng.next_below(bin.size())];
    }
    auto& queue = queues[b];
    auto& pos = queue_pos[b];
    if (pos >= queue.size()) {
      queue = bin;
      for (size_t i = queue.size(); i > 1; --i) {
        std::swap(queue[i - 1], queue[rng.next_below(i)]);
      }
      pos = 0;
    }
    return queue[pos++];
  };

  std::vector<std::vector<size_t>> batches;
  batches.reserve(options.num_batches);
  for (int batch = 0; batch < options.num_batches; ++batch) {
    std::vector<size_t> records;
    records.reserve(options.batch_size);
    for (int i = 0; i < options.batch_size; ++i) {
      size_t b = weighted_pick(weights, rng);
      records.push_back(draw_from_bin(b));
    }
    // Length bucketing inside the batch.
    std::sort(records.begin(), records.end(), [&](size_t a, size_t b) {
      auto ta = scores[a].target_token_count;
      auto tb = scores[b].target_token_count;
      if (ta != tb) return ta < tb;
      return a < b;
    });
    batches.push_back(std::move(records));
  }
  return batches;
}

std::vector<std::pair<double, double>> load_external_scores(
    const std::string& path, size_t expected_count) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open score file: " + path);
  std::vector<std::pair<double, double>> scores(expected_count, {0.0, 0.0});
  std::vector<bool> seen(expected_count, false);
  std::string line;
  uint64_t lineno = 0;
  size_t rows = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    size_t t1 = line.find('\t');
    size_t t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos) {
      throw FormatError(path + ":" + std::to_string(lineno) +
                        ": expected index<TAB>logprob_in<TAB>logprob_out");
    }
    size_t index;
    double in_score, out_score;
    try {
      index = std::stoull(line.substr(0, t1));
      in_score = std::stod(line.substr(t1 + 1, t2 - t1 - 1));
      out_score = std::stod(line.substr(t2 + 1));
    } catch (const std::exception&) {
      throw FormatError(path + ":" + std::to_string(lineno) + ": bad row");
    }
    ++rows;
    if (index >= expected_count) {
      throw FormatError(path + ": index " + std::to_string(index) +
                        " outside corpus of " +
                        std::to_string(expected_count) + " records");
    }
    if (seen[index]) {
      throw FormatError(path + ": duplicate index " + std::to_string(index));
    }
    seen[index] = true;
    scores[index] = {in_score, out_score};
  }
  if (rows != expected_count) {
    std::string missing;
    int listed = 0;
    for (size_t i = 0; i < expected_count && listed < 5; ++i) {
      if (!seen[i]) {
        if (listed) missing += ", ";
        missing += std::to_string(i);
        ++listed;
      }
    }
    throw FormatError(path + ": " + std::to_string(rows) + " rows for " +
                      std::to_string(expected_count) +
                      " records; missing indices: " + missing);
  }
  return scores;
}

void save_external_scores(
    const std::string& path,
    const std::vector<std::pair<double, double>>& scores) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open file for writing: " + path);
  char buf[64];
  for (size_t i = 0; i < scores.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu\t%.17g\t%.17g", i, scores[i].first,
                  scores[i].second);
    out << buf << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace mtpipe
