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

#ifndef MTPIPE_METRICS_H_
#define MTPIPE_METRICS_H_

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace mtpipe {

// Discrete distribution: non-negative entries summing to 1 within 1e-9.
using ProbVector = std::vector<double>;

// Throws InputError if v is empty, has a negative entry, or is unnormalized.
void validate_prob_vector(const ProbVector& v);

enum class BleuSmoothing { kNone, kAdd1 };
BleuSmoothing bleu_smoothing_from_string(const std::string& name);

struct BleuResult {
  double score = 0.0;            // 0..100
  double brevity_penalty = 1.0;  // exp(1 - ref_len/hyp_len), capped at 1
  std::vector<double> precisions;  // per order, 0..1
  uint64_t hyp_length = 0;
  uint64_t ref_length = 0;

  nlohmann::json to_json() const;
};

// Corpus-level BLEU over tokenized segments: modified n-gram precision,
// geometric mean over orders 1..max_n, exponential brevity penalty. With
// kAdd1 smoothing, orders >= 2 use (matches+1)/(total+1) so sparse corpora
// stay non-zero; order 1 is never smoothed. Throws InputError when the
// corpora differ in size or are empty, ConfigError when max_n < 1.
BleuResult bleu(const std::vector<std::vector<std::string>>& hypotheses,
                const std::vector<std::vector<std::string>>& references,
                int max_n = 4, BleuSmoothing smoothing = BleuSmoothing::kNone);

// Kullback-Leibler divergence sum_i p_i ln(p_i/q_i) with 0 ln 0 = 0 and q
// floored at 1e-12 where p > 0. Throws InputError on dimension mismatch.
double kl(const ProbVector& p, const ProbVector& q);
double kl_bidirectional(const ProbVector& p, const ProbVector& q);

// Consistency regularizer (alpha/2) * kl_bidirectional(p, q); alpha >= 0.
double rdrop_reg(const ProbVector& p, const ProbVector& q, double alpha);

// -(1-eps) ln p[target] - (eps/V) sum_v ln p[v], probabilities floored at
// 1e-12. Reduces to the negative log-likelihood at eps = 0. Throws
// InputError when target is out of range, ConfigError unless 0 <= eps < 1.
double label_smoothed_ce(const ProbVector& p_model, size_t target,
                         double epsilon);

}  // namespace mtpipe

#endif  // MTPIPE_METRICS_H_
