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

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "mtpipe/corpus.h"
#include "mtpipe/hash.h"

namespace mtpipe {

// Removes control (Cc, keeping \n and \t) and format (Cf) characters and
// decodes XML escapes exactly once: &amp; &lt; &gt; &quot; &apos; and
// numeric &#NN; / &#xNN;. Escapes introduced by decoding are not rescanned,
// so "&amp;amp;" comes out as "&amp;".
std::string strip_invisible(const std::string& text);

// Full-width ASCII-range forms (U+FF01..U+FF5E) and the ideographic space
// map to their half-width counterparts; CJK ideographs are untouched.
std::string normalize_width(const std::string& text);

// Fixed rule subset of punctuation normalization, applied in this order:
// curly single/double quotes to straight quotes, en/em dashes to "-",
// the ellipsis character to "...", non-breaking space to space, then runs
// of spaces collapsed to one.
std::string normalize_punct(const std::string& text);

// One-to-one codepoint mapping loaded from "trad<TAB>simp" lines, used for
// traditional-to-simplified Chinese conversion. Completeness of the table
// is the caller's responsibility.
class T2sTable {
 public:
  T2sTable() = default;
  static T2sTable load(const std::string& path);
  static T2sTable from_pairs(
      const std::vector<std::pair<char32_t, char32_t>>& pairs);

  std::string convert(const std::string& text) const;
  bool empty() const { return map_.empty(); }
  size_t size() const { return map_.size(); }

 private:
  std::unordered_map<char32_t, char32_t> map_;
};

// Dedup key: width-normalized NFC source and target joined with a
// separator. First occurrence wins.
std::string dedup_key(const SentencePair& pair);

class Deduper {
 public:
  // Returns true if the pair's key was seen before (and records it).
  bool seen_before(const SentencePair& pair);
  size_t unique_count() const { return seen_.size(); }

 private:
  std::unordered_set<Digest128, Digest128Hash> seen_;
};

std::vector<SentencePair> dedup(const std::vector<SentencePair>& pairs);

// Character n-gram Naive Bayes language identifier. Per-language event
// distributions are add-k smoothed over the event space shared by all
// languages plus one unseen slot, so they sum to 1 exactly.
class LidModel {
 public:
  struct Options {
    int order = 3;
    double k = 0.5;
    double floor = 1e-10;  // events outside the shared space
  };

  static LidModel train(const std::map<std::string, std::string>& samples,
                        Options options);
  static LidModel train(const std::map<std::string, std::string>& samples) {
    return train(samples, Options());
  }

  // Best language and margin = (best - second best) average per-codepoint
  // log-probability. Throws ScoreError on empty text.
  std::pair<std::string, double> classify(const std::string& text) const;

  // Total log-probability of the text's n-gram events under one language.
  double score(const std::string& lang, const std::string& text) const;

  const std::vector<std::string>& languages() const { return langs_; }
  double event_prob(const std::string& lang, const std::string& event) const;
  size_t event_space_size() const { return event_index_.size() + 1; }

 private:
  std::vector<std::string> events_of(const std::string& text) const;

  Options options_;
  std::vector<std::string> langs_;
  std::unordered_map<std::string, size_t> event_index_;
  // langs_ x (events + unseen slot), log probabilities
  std::vector<std::vector<double>> logprob_;
};

// IBM Model 1 lexical translation table t(f|e) trained with EM, f a target
// token and e a source token or the null token. Uniform initialization over
// co-occurring pairs; rows renormalize every iteration.
class TranslationTable {
 public:
  static constexpr const char* kNullToken = "<null>";

  static TranslationTable train(const std::vector<SentencePair>& pairs,
                                int iterations);

  // (1/|tgt|) sum_j log max_i t(tgt_j | src_i or null), floored so the
  // score is finite. Higher is better aligned.
  double align_score(const SentencePair& pair) const;

  double prob(const std::string& tgt_token, const std::string& src_token) const;
  // Corpus log-likelihood before each EM update plus one final value;
  // non-decreasing by the EM guarantee.
  const std::vector<double>& iteration_loglik() const { return loglik_; }
  std::vector<std::string> source_vocab() const;
  double row_sum(const std::string& src_token) const;

  void save(const std::string& path) const;
  static TranslationTable load(const std::string& path);

 private:
  double corpus_loglik(const std::vector<SentencePair>& pairs) const;

  std::unordered_map<std::string, std::unordered_map<std::string, double>> t_;
  std::vector<double> loglik_;
  double floor_ = 1e-12;
};

struct FilterReport {
  struct Entry {
    std::string name;
    uint64_t kept = 0;
    uint64_t dropped = 0;
    std::vector<std::string> rejected_samples;  // capped
  };
  std::vector<Entry> entries;
  uint64_t input_count = 0;
  uint64_t output_count = 0;

  nlohmann::json to_json() const;
};

// External models the filter chain may need; the chain keeps non-owning
// pointers, so they must outlive it.
struct FilterResources {
  const LidModel* lid = nullptr;
  const TranslationTable* align = nullptr;
  const T2sTable* t2s = nullptr;
};

// Ordered, configurable cleaning and filtering chain. Config is a JSON
// array of {"name": ..., params...} entries; see FilterChain::kFilterNames
// for the filter vocabulary and per-filter parameters. Default thresholds:
// max_tokens 150, ratio_hi 4.0, ratio_lo 0.25 (both strict), lid min_margin
// 0.0, align min_score -6.0.
class FilterChain {
 public:
  FilterChain(const nlohmann::json& filters_config, FilterResources resources);
  ~FilterChain();
  FilterChain(FilterChain&&) noexcept;
  FilterChain& operator=(FilterChain&&) noexcept;

  // Applies transforms in place; returns false if the pair was dropped.
  bool process(SentencePair& pair);

  const FilterReport& report() const { return report_; }
  // True if the chain holds per-stream state (a dedup step) and must run
  // single-stream.
  bool stateful() const { return stateful_; }

  static const std::vector<std::string> kFilterNames;

  struct Step;

 private:
  std::vector<std::unique_ptr<Step>> steps_;
  FilterReport report_;
  bool stateful_ = false;
};

// Convenience wrapper over FilterChain for in-memory corpora.
std::pair<std::vector<SentencePair>, FilterReport> filter_chain(
    const std::vector<SentencePair>& pairs, const nlohmann::json& config,
    FilterResources resources = {});

// Splits a monolingual sentence into segments of at most max_len tokens,
// cutting after the last sentence-final punctuation token (. ! ? 。 ！ ？)
// within each window and falling back to a hard split. Token content and
// order are preserved.
std::vector<Sentence> split_long(const Sentence& sentence, int max_len);
std::vector<Sentence> split_long(const std::vector<Sentence>& mono,
                                 int max_len);

}  // namespace mtpipe
