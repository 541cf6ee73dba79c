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
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mtpipe/text.h"

namespace mtpipe {

// How a sentence pair entered the corpus.
enum class Provenance {
  kAuthentic,
  kFt,
  kBtBeam,
  kBtSampling,
  kBtTagged,
  kDdFwd,
  kDdBwd,
  kBitReversed,
  kTel,
};

std::string_view to_string(Provenance p);
Provenance provenance_from_string(std::string_view s);

// One side of a bilingual record. Text is NFC-normalized at construction and
// tokens are derived from it once via the language's tokenizer.
class Sentence {
 public:
  Sentence() = default;
  Sentence(std::string text, std::string lang);

  const std::string& text() const { return text_; }
  const std::string& lang() const { return lang_; }
  const std::vector<std::string>& tokens() const { return tokens_; }
  size_t token_count() const { return tokens_.size(); }
  TokenizerKind tokenizer() const { return tokenizer_for_lang(lang_); }
  bool empty() const { return text_.empty(); }

  friend bool operator==(const Sentence& a, const Sentence& b) {
    return a.text_ == b.text_ && a.lang_ == b.lang_;
  }
  friend bool operator!=(const Sentence& a, const Sentence& b) {
    return !(a == b);
  }

 private:
  std::string text_;
  std::string lang_;
  std::vector<std::string> tokens_;
};

struct SentencePair {
  Sentence src;
  Sentence tgt;
  Provenance provenance = Provenance::kAuthentic;
  std::map<std::string, double> scores;

  friend bool operator==(const SentencePair& a, const SentencePair& b) {
    return a.src == b.src && a.tgt == b.tgt &&
           a.provenance == b.provenance && a.scores == b.scores;
  }
  friend bool operator!=(const SentencePair& a, const SentencePair& b) {
    return !(a == b);
  }
};

struct Hypothesis {
  std::string text;
  double logprob = 0.0;
  int rank = 1;

  friend bool operator==(const Hypothesis& a, const Hypothesis& b) {
    return a.text == b.text && a.logprob == b.logprob && a.rank == b.rank;
  }
};

// Ranked decoder output. Hypotheses are sorted by non-increasing logprob
// with ranks 1..n.
struct NBestList {
  Sentence source;
  std::vector<Hypothesis> hypotheses;

  // Sorts by (logprob desc, text asc) and assigns contiguous ranks.
  void sort_and_rank();
};

struct CorpusStats {
  uint64_t pair_count = 0;
  uint64_t src_tokens = 0;
  uint64_t tgt_tokens = 0;
  std::map<std::string, uint64_t> provenance_counts;
  // src/tgt token-ratio buckets of width 0.25; the top bucket "8.00+" also
  // absorbs pairs with an empty target side.
  std::map<std::string, uint64_t> ratio_histogram;

  void add(const SentencePair& pair);
  nlohmann::json to_json() const;
};

std::string ratio_bucket(size_t src_tokens, size_t tgt_tokens);

enum class RecordFormat { kJsonl, kTsv };

RecordFormat record_format_from_string(std::string_view s);

struct ReaderOptions {
  // Languages assumed for TSV input and for JSONL records that do not carry
  // language fields.
  std::string default_src_lang = "en";
  std::string default_tgt_lang = "zh";
  // Above this malformed-line fraction the whole file is rejected.
  double max_malformed_fraction = 0.10;
};

// Streaming reader; memory use is bounded by one record. Malformed lines
// are counted and skipped; if more than max_malformed_fraction of all lines
// are malformed, a FormatError naming the offending lines is thrown at end
// of stream.
class RecordReader {
 public:
  RecordReader(const std::string& path, RecordFormat format,
               ReaderOptions options = {});

  // Returns false at end of input.
  bool next(SentencePair& out);

  uint64_t lines_read() const { return lines_read_; }
  uint64_t records_read() const { return records_read_; }
  uint64_t malformed_count() const { return malformed_lines_.size(); }
  const std::vector<uint64_t>& malformed_lines() const {
    return malformed_lines_;
  }

 private:
  std::optional<SentencePair> parse_line(const std::string& line);

  std::ifstream in_;
  std::string path_;
  RecordFormat format_;
  ReaderOptions options_;
  uint64_t lines_read_ = 0;
  uint64_t records_read_ = 0;
  std::vector<uint64_t> malformed_lines_;  // 1-based, capped
  bool finished_ = false;
};

class RecordWriter {
 public:
  RecordWriter(const std::string& path, RecordFormat format);
  ~RecordWriter();

  void write(const SentencePair& pair);
  // Flushes and verifies the stream; further writes are invalid.
  uint64_t close();
  uint64_t count() const { return count_; }

 private:
  std::ofstream out_;
  std::string path_;
  RecordFormat format_;
  uint64_t count_ = 0;
  bool closed_ = false;
};

nlohmann::json pair_to_json(const SentencePair& pair);
SentencePair pair_from_json(const nlohmann::json& j, const ReaderOptions& options);

// One serialized record line in the given format, without a trailing newline.
std::string record_to_line(const SentencePair& pair, RecordFormat format);

std::vector<SentencePair> read_all_records(const std::string& path,
                                           RecordFormat format,
                                           ReaderOptions options = {});
uint64_t write_all_records(const std::vector<SentencePair>& pairs,
                           const std::string& path, RecordFormat format);

CorpusStats compute_stats(const std::vector<SentencePair>& pairs);
CorpusStats compute_stats(RecordReader& reader);

std::vector<Sentence> read_mono(const std::string& path,
                                const std::string& lang);
void write_mono(const std::vector<Sentence>& sentences,
                const std::string& path);

}  // namespace mtpipe
