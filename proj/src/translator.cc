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

#include "mtpipe/translator.h"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "mtpipe/error.h"
#include "mtpipe/hash.h"
#include "mtpipe/rng.h"
#include "mtpipe/text.h"

namespace mtpipe {

DecodeMode decode_mode_from_string(const std::string& name) {
  if (name == "beam") return DecodeMode::kBeam;
  if (name == "sampling") return DecodeMode::kSampling;
  throw ConfigError("unknown decode mode: '" + name + "'");
}

std::string to_string(DecodeMode mode) {
  return mode == DecodeMode::kBeam ? "beam" : "sampling";
}

void DecodeSpec::validate() const {
  if (width < 1) throw ConfigError("decode width must be >= 1");
  if (!(temperature > 0.0)) throw ConfigError("temperature must be > 0");
}

Lexicon lexicon_from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open lexicon: " + path);
  Lexicon lexicon;
  std::string line;
  uint64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    size_t t1 = line.find('\t');
    size_t t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos) {
      throw FormatError(path + ":" + std::to_string(lineno) +
                        ": expected src<TAB>tgt<TAB>prob");
    }
    double prob;
    try {
      prob = std::stod(line.substr(t2 + 1));
    } catch (const std::exception&) {
      throw FormatError(path + ":" + std::to_string(lineno) +
                        ": bad probability");
    }
    lexicon[line.substr(0, t1)].push_back(
        {line.substr(t1 + 1, t2 - t1 - 1), prob});
  }
  return lexicon;
}

DictTranslator::DictTranslator(Lexicon lexicon, std::string output_lang)
    : lexicon_(std::move(lexicon)), output_lang_(std::move(output_lang)) {
  for (const auto& [src, rows] : lexicon_) {
    if (rows.empty()) {
      throw ConfigError("lexicon row for '" + src + "' is empty");
    }
    double sum = 0.0;
    for (const auto& row : rows) {
      if (!(row.prob > 0.0)) {
        throw ConfigError("lexicon row for '" + src +
                          "' has a non-positive probability");
      }
      sum += row.prob;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw ConfigError("lexicon row for '" + src +
                        "' does not sum to 1 (got " + std::to_string(sum) +
                        ")");
    }
  }
}

namespace {

struct Candidate {
  std::vector<std::string> tokens;
  double logprob = 0.0;
  std::string text;
};

const std::vector<LexiconEntry>& options_for(const Lexicon& lexicon,
                                             const std::string& token,
                                             std::vector<LexiconEntry>* oov) {
  auto it = lexicon.find(token);
  if (it != lexicon.end()) return it->second;
  *oov = {{token, 1.0}};
  return *oov;
}

}  // namespace

NBestList DictTranslator::translate(const Sentence& source,
                                    const DecodeSpec& spec, int n) const {
  spec.validate();
  if (n < 1) throw ConfigError("translate: n must be >= 1");
  TokenizerKind kind = tokenizer_for_lang(output_lang_);
  size_t width = static_cast<size_t>(std::max(spec.width, n));

  NBestList result;
  result.source = source;

  if (spec.mode == DecodeMode::kBeam) {
    std::vector<Candidate> frontier{Candidate{}};
    for (const auto& token : source.tokens()) {
      std::vector<LexiconEntry> oov;
      const auto& options = options_for(lexicon_, token, &oov);
      std::vector<Candidate> next;
      next.reserve(frontier.size() * options.size());
      for (const auto& cand : frontier) {
        for (const auto& option : options) {
          Candidate ext = cand;
          ext.tokens.push_back(option.target);
          ext.logprob += std::log(option.prob);
          ext.text = join_tokens(ext.tokens, kind);
          next.push_back(std::move(ext));
        }
      }
      std::sort(next.begin(), next.end(),
                [](const Candidate& a, const Candidate& b) {
                  if (a.logprob != b.logprob) return a.logprob > b.logprob;
                  return a.text < b.text;
                });
      if (next.size() > width) next.resize(width);
      frontier = std::move(next);
    }
    for (const auto& cand : frontier) {
      result.hypotheses.push_back({cand.text, cand.logprob, 0});
    }
  } else {
    Rng rng(derive_seed(spec.seed, source.text()));
    std::map<std::string, double> best_by_text;
    for (size_t draw = 0; draw < width; ++draw) {
      std::vector<std::string> tokens;
      double logprob = 0.0;
      for (const auto& token : source.tokens()) {
        std::vector<LexiconEntry> oov;
        const auto& options = options_for(lexicon_, token, &oov);
        std::vector<double> weights(options.size());
        for (size_t i = 0; i < options.size(); ++i) {
          weights[i] = std::pow(options[i].prob, 1.0 / spec.temperature);
        }
        size_t pick = weighted_pick(weights, rng);
        tokens.push_back(options[pick].target);
        logprob += std::log(options[pick].prob);
      }
      std::string text = join_tokens(tokens, kind);
      auto it = best_by_text.find(text);
      if (it == best_by_text.end() || logprob > it->second) {
        best_by_text[text] = logprob;
      }
    }
    for (const auto& [text, logprob] : best_by_text) {
      result.hypotheses.push_back({text, logprob, 0});
    }
  }

  result.sort_and_rank();
  if (result.hypotheses.size() > static_cast<size_t>(n)) {
    result.hypotheses.resize(n);
  }
  return result;
}

// ---------------------------------------------------------------------------
// N-gram language model

namespace {
constexpr int kBosId = -1;
constexpr double kLmFloor = 1e-10;
}  // namespace

NgramLm NgramLm::train(const std::vector<Sentence>& corpus, int order,
                       double k) {
  if (order < 1) throw ConfigError("lm: order must be >= 1");
  if (k < 0.0) throw ConfigError("lm: add-k constant must be >= 0");
  NgramLm lm;
  lm.order_ = order;
  lm.k_ = k;

  uint64_t total_tokens = 0;
  for (const auto& sentence : corpus) {
    for (const auto& token : sentence.tokens()) {
      ++total_tokens;
      lm.vocab_.emplace(token, static_cast<int>(lm.vocab_.size()));
    }
  }
  if (total_tokens == 0) throw ConfigError("lm: empty training corpus");

  for (const auto& sentence : corpus) {
    const auto& tokens = sentence.tokens();
    std::vector<int> ids;
    ids.reserve(tokens.size());
    for (const auto& token : tokens) ids.push_back(lm.vocab_.at(token));
    for (size_t i = 0; i < ids.size(); ++i) {
      std::vector<int> context;
      for (int j = order - 1; j >= 1; --j) {
        context.push_back(i >= static_cast<size_t>(j) ? ids[i - j] : kBosId);
      }
      ++lm.counts_[context][ids[i]];
      ++lm.context_totals_[context];
    }
  }
  return lm;
}

int NgramLm::id_of(const std::string& token) const {
  auto it = vocab_.find(token);
  return it == vocab_.end() ? static_cast<int>(vocab_.size()) : it->second;
}

double NgramLm::prob_from_counts(const std::vector<int>& context,
                                 int token_id) const {
  double v = static_cast<double>(vocab_size());
  auto totals_it = context_totals_.find(context);
  if (totals_it == context_totals_.end()) return 1.0 / v;
  double total = static_cast<double>(totals_it->second);
  double count = 0.0;
  const auto& row = counts_.at(context);
  auto it = row.find(token_id);
  if (it != row.end()) count = static_cast<double>(it->second);
  double p = (count + k_) / (total + k_ * v);
  return std::max(p, kLmFloor);
}

double NgramLm::token_prob(const std::vector<std::string>& context,
                           const std::string& token) const {
  std::vector<int> ids;
  size_t need = static_cast<size_t>(order_ - 1);
  for (size_t i = 0; i < need; ++i) {
    size_t over = need - i;  // positions from the right
    if (context.size() >= over) {
      ids.push_back(id_of(context[context.size() - over]));
    } else {
      ids.push_back(kBosId);
    }
  }
  return prob_from_counts(ids, id_of(token));
}

double NgramLm::logprob(const Sentence& sentence) const {
  const auto& tokens = sentence.tokens();
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const auto& token : tokens) ids.push_back(id_of(token));
  double total = 0.0;
  for (size_t i = 0; i < ids.size(); ++i) {
    std::vector<int> context;
    for (int j = order_ - 1; j >= 1; --j) {
      context.push_back(i >= static_cast<size_t>(j) ? ids[i - j] : kBosId);
    }
    total += std::log(prob_from_counts(context, ids[i]));
  }
  return total;
}

double NgramLm::perplexity(const std::vector<Sentence>& corpus) const {
  double total_logprob = 0.0;
  uint64_t total_tokens = 0;
  for (const auto& sentence : corpus) {
    total_logprob += logprob(sentence);
    total_tokens += sentence.token_count();
  }
  if (total_tokens == 0) throw ScoreError("perplexity of an empty corpus");
  return std::exp(-total_logprob / static_cast<double>(total_tokens));
}

// ---------------------------------------------------------------------------
// Scorers

double TargetLmScorer::logprob(const Sentence&, const Sentence& tgt) const {
  if (tgt.empty() || tgt.token_count() == 0) {
    throw ScoreError("cannot score an empty target");
  }
  return lm_->logprob(tgt);
}

double ChannelScorer::logprob(const Sentence& src, const Sentence& tgt) const {
  if (tgt.empty() || tgt.token_count() == 0) {
    throw ScoreError("cannot score an empty target");
  }
  constexpr double kFloor = 1e-12;
  double channel = 0.0;
  for (const auto& f : tgt.tokens()) {
    double best = table_->prob(f, TranslationTable::kNullToken);
    for (const auto& e : src.tokens()) {
      best = std::max(best, table_->prob(f, e));
    }
    channel += std::log(std::max(best, kFloor));
  }
  return channel + lm_->logprob(tgt);
}

}  // namespace mtpipe
