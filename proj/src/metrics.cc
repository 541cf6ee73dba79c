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

#include "mtpipe/metrics.h"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "mtpipe/error.h"

namespace mtpipe {

namespace {
constexpr double kProbFloor = 1e-12;
}

void validate_prob_vector(const ProbVector& v) {
  if (v.empty()) throw InputError("probability vector is empty");
  double sum = 0.0;
  for (double x : v) {
    if (x < 0.0) throw InputError("probability vector has a negative entry");
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw InputError("probability vector sums to " + std::to_string(sum) +
                     ", expected 1");
  }
}

BleuSmoothing bleu_smoothing_from_string(const std::string& name) {
  if (name == "none") return BleuSmoothing::kNone;
  if (name == "add1") return BleuSmoothing::kAdd1;
  throw ConfigError("unknown BLEU smoothing: '" + name + "'");
}

nlohmann::json BleuResult::to_json() const {
  return nlohmann::json{{"bleu", score},
                        {"brevity_penalty", brevity_penalty},
                        {"precisions", precisions},
                        {"hyp_length", hyp_length},
                        {"ref_length", ref_length}};
}

namespace {

// n-gram as joined tokens; \x1F never occurs inside a token in practice and
// only equality matters here.
void count_ngrams(const std::vector<std::string>& tokens, int n,
                  std::unordered_map<std::string, uint64_t>* out) {
  if (tokens.size() < static_cast<size_t>(n)) return;
  for (size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string key;
    for (int j = 0; j < n; ++j) {
      if (j) key.push_back('\x1F');
      key += tokens[i + j];
    }
    ++(*out)[key];
  }
}

}  // namespace

BleuResult bleu(const std::vector<std::vector<std::string>>& hypotheses,
                const std::vector<std::vector<std::string>>& references,
                int max_n, BleuSmoothing smoothing) {
  if (max_n < 1) throw ConfigError("bleu: max_n must be >= 1");
  if (hypotheses.size() != references.size()) {
    throw InputError("bleu: hypothesis/reference count mismatch (" +
                     std::to_string(hypotheses.size()) + " vs " +
                     std::to_string(references.size()) + ")");
  }
  if (hypotheses.empty()) throw InputError("bleu: empty corpus");

  BleuResult result;
  std::vector<uint64_t> matches(max_n, 0), totals(max_n, 0);
  for (size_t s = 0; s < hypotheses.size(); ++s) {
    result.hyp_length += hypotheses[s].size();
    result.ref_length += references[s].size();
    for (int n = 1; n <= max_n; ++n) {
      std::unordered_map<std::string, uint64_t> hyp_counts, ref_counts;
      count_ngrams(hypotheses[s], n, &hyp_counts);
      count_ngrams(references[s], n, &ref_counts);
      for (const auto& [gram, count] : hyp_counts) {
        totals[n - 1] += count;
        auto it = ref_counts.find(gram);
        if (it != ref_counts.end()) {
          matches[n - 1] += std::min(count, it->second);
        }
      }
    }
  }

  result.precisions.resize(max_n, 0.0);
  double log_sum = 0.0;
  bool zero = false;
  for (int n = 1; n <= max_n; ++n) {
    double m = static_cast<double>(matches[n - 1]);
    double t = static_cast<double>(totals[n - 1]);
    if (smoothing == BleuSmoothing::kAdd1 && n >= 2) {
      m += 1.0;
      t += 1.0;
    }
    double p = t > 0.0 ? m / t : 0.0;
    result.precisions[n - 1] = p;
    if (p > 0.0) {
      log_sum += std::log(p);
    } else {
      zero = true;
    }
  }

  if (result.hyp_length > 0 && result.hyp_length < result.ref_length) {
    result.brevity_penalty =
        std::exp(1.0 - static_cast<double>(result.ref_length) /
                           static_cast<double>(result.hyp_length));
  }
  if (zero || result.hyp_length == 0) {
    result.score = 0.0;
  } else {
    result.score =
        100.0 * result.brevity_penalty * std::exp(log_sum / max_n);
  }
  return result;
}

double kl(const ProbVector& p, const ProbVector& q) {
  if (p.size() != q.size()) {
    throw InputError("kl: dimension mismatch (" + std::to_string(p.size()) +
                     " vs " + std::to_string(q.size()) + ")");
  }
  validate_prob_vector(p);
  validate_prob_vector(q);
  double total = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) {
      total += p[i] * std::log(p[i] / std::max(q[i], kProbFloor));
    }
  }
  return total;
}

double kl_bidirectional(const ProbVector& p, const ProbVector& q) {
  return kl(p, q) + kl(q, p);
}

double rdrop_reg(const ProbVector& p, const ProbVector& q, double alpha) {
  if (alpha < 0.0) throw ConfigError("rdrop: alpha must be >= 0");
  if (alpha == 0.0) {
    // Still validate shapes so misuse surfaces regardless of alpha.
    kl_bidirectional(p, q);
    return 0.0;
  }
  return alpha / 2.0 * kl_bidirectional(p, q);
}

double label_smoothed_ce(const ProbVector& p_model, size_t target,
                         double epsilon) {
  validate_prob_vector(p_model);
  if (target >= p_model.size()) {
    throw InputError("label_smoothed_ce: target index out of range");
  }
  if (epsilon < 0.0 || epsilon >= 1.0) {
    throw ConfigError("label_smoothed_ce: epsilon must be in [0, 1)");
  }
  double v = static_cast<double>(p_model.size());
  double nll = -std::log(std::max(p_model[target], kProbFloor));
  double uniform_term = 0.0;
  for (double x : p_model) {
    uniform_term -= std::log(std::max(x, kProbFloor));
  }
  return (1.0 - epsilon) * nll + epsilon / v * uniform_term;
}

}  // namespace mtpipe
