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

#ifndef MTPIPE_TRANSLATOR_H_
#define MTPIPE_TRANSLATOR_H_

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "mtpipe/corpus.h"
#include "mtpipe/preprocess.h"

namespace mtpipe {

enum class DecodeMode { kBeam, kSampling };

DecodeMode decode_mode_from_string(const std::string& name);
std::string to_string(DecodeMode mode);

// How to decode: beam width or sample count, temperature (sampling only)
// and the seed all randomness flows from. Identical (source, spec) calls
// return identical results.
struct DecodeSpec {
  DecodeMode mode = DecodeMode::kBeam;
  int width = 1;
  double temperature = 1.0;
  uint64_t seed = 0;

  // Throws ConfigError unless width >= 1 and temperature > 0.
  void validate() const;
};

// Translation model interface. Implementations must be deterministic given
// (source, spec), return at most n hypotheses sorted by logprob, and be safe
// for concurrent calls.
class Translator {
 public:
  virtual ~Translator() = default;
  virtual NBestList translate(const Sentence& source, const DecodeSpec& spec,
                              int n) const = 0;
  virtual std::string output_lang() const = 0;
};

// Conditional sentence-level log-probability, natural log, finite (floored).
class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual double logprob(const Sentence& src, const Sentence& tgt) const = 0;
};

struct LexiconEntry {
  std::string target;
  double prob;
};
// Source token -> candidate target tokens with probabilities summing to 1.
using Lexicon = std::map<std::string, std::vector<LexiconEntry>>;

// Reads "src<TAB>tgt<TAB>prob" lines; rows keep file order per source token.
Lexicon lexicon_from_file(const std::string& path);

// Word-by-word lexicon translator with no reordering. Out-of-vocabulary
// source tokens copy through with probability 1, so the empty lexicon is the
// identity translator. Beam search over per-token choices is exact (token
// positions are independent); sampling draws each token from the
// temperature-scaled distribution, seeded by (spec.seed, source text).
// Hypothesis logprob is the sum of unscaled per-token log-probabilities.
class DictTranslator : public Translator {
 public:
  // Throws ConfigError if a lexicon row is empty, has prob <= 0, or does not
  // sum to 1 within 1e-9.
  DictTranslator(Lexicon lexicon, std::string output_lang);

  NBestList translate(const Sentence& source, const DecodeSpec& spec,
                      int n) const override;
  std::string output_lang() const override { return output_lang_; }

 private:
  Lexicon lexicon_;
  std::string output_lang_;
};

// Add-k smoothed n-gram language model over sentence tokens. The vocabulary
// is the observed token set plus one unknown slot; contexts are padded with
// a begin-of-sentence sentinel and no end-of-sentence event is scored, so
// P(token | context) sums to 1 over vocabulary+unknown for every context.
// An entirely unseen context backs off to the uniform 1/V; with k=0 a zero
// probability is floored at 1e-10 when scoring.
class NgramLm {
 public:
  static NgramLm train(const std::vector<Sentence>& corpus, int order,
                       double k);

  double logprob(const Sentence& sentence) const;
  // P(token | context of the last order-1 tokens), for direct inspection.
  double token_prob(const std::vector<std::string>& context,
                    const std::string& token) const;
  double perplexity(const std::vector<Sentence>& corpus) const;

  int order() const { return order_; }
  // Observed tokens plus the unknown slot.
  size_t vocab_size() const { return vocab_.size() + 1; }

 private:
  int id_of(const std::string& token) const;
  double prob_from_counts(const std::vector<int>& context, int token_id) const;

  int order_ = 1;
  double k_ = 0.0;
  std::unordered_map<std::string, int> vocab_;
  std::map<std::vector<int>, std::unordered_map<int, int64_t>> counts_;
  std::map<std::vector<int>, int64_t> context_totals_;
};

// Scores the target side only with a language model; src is ignored. Serves
// as the in-domain / out-domain probability model pair for difficulty
// scoring. Throws ScoreError on an empty target.
class TargetLmScorer : public Scorer {
 public:
  explicit TargetLmScorer(const NgramLm* lm) : lm_(lm) {}
  double logprob(const Sentence& src, const Sentence& tgt) const override;

 private:
  const NgramLm* lm_;
};

// Additive channel + language model composition:
//   logprob(x, y) = sum_j [ log max_i t(y_j | x_i or null) + log P_lm(y_j | context) ]
// Throws ScoreError on an empty target.
class ChannelScorer : public Scorer {
 public:
  ChannelScorer(const TranslationTable* table, const NgramLm* lm)
      : table_(table), lm_(lm) {}
  double logprob(const Sentence& src, const Sentence& tgt) const override;

 private:
  const TranslationTable* table_;
  const NgramLm* lm_;
};

}  // namespace mtpipe

#endif  // MTPIPE_TRANSLATOR_H_
