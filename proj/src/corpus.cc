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

#include "mtpipe/corpus.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "mtpipe/error.h"

namespace mtpipe {

using nlohmann::json;

namespace {

constexpr struct {
  Provenance value;
  std::string_view name;
} kProvenanceNames[] = {
    {Provenance::kAuthentic, "AUTHENTIC"},
    {Provenance::kFt, "FT"},
    {Provenance::kBtBeam, "BT_BEAM"},
    {Provenance::kBtSampling, "BT_SAMPLING"},
    {Provenance::kBtTagged, "BT_TAGGED"},
    {Provenance::kDdFwd, "DD_FWD"},
    {Provenance::kDdBwd, "DD_BWD"},
    {Provenance::kBitReversed, "BIT_REVERSED"},
    {Provenance::kTel, "TEL"},
};

}  // namespace

std::string_view to_string(Provenance p) {
  for (const auto& entry : kProvenanceNames) {
    if (entry.value == p) return entry.name;
  }
  return "AUTHENTIC";
}

Provenance provenance_from_string(std::string_view s) {
  for (const auto& entry : kProvenanceNames) {
    if (entry.name == s) return entry.value;
  }
  throw FormatError("unknown provenance: " + std::string(s));
}

Sentence::Sentence(std::string text, std::string lang)
    : text_(nfc_normalize(text)), lang_(std::move(lang)) {
  tokens_ = tokenize(text_, tokenizer_for_lang(lang_));
}

void NBestList::sort_and_rank() {
  std::stable_sort(hypotheses.begin(), hypotheses.end(),
                   [](const Hypothesis& a, const Hypothesis& b) {
                     if (a.logprob != b.logprob) return a.logprob > b.logprob;
                     return a.text < b.text;
                   });
  for (size_t i = 0; i < hypotheses.size(); ++i) {
    hypotheses[i].rank = static_cast<int>(i) + 1;
  }
}

std::string ratio_bucket(size_t src_tokens, size_t tgt_tokens) {
  if (tgt_tokens == 0) return "8.00+";
  double ratio = static_cast<double>(src_tokens) / tgt_tokens;
  if (ratio >= 8.0) return "8.00+";
  double edge = std::floor(ratio / 0.25) * 0.25;
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%.2f", edge);
  return buf;
}

void CorpusStats::add(const SentencePair& pair) {
  ++pair_count;
  src_tokens += pair.src.token_count();
  tgt_tokens += pair.tgt.token_count();
  ++provenance_counts[std::string(to_string(pair.provenance))];
  ++ratio_histogram[ratio_bucket(pair.src.token_count(),
                                 pair.tgt.token_count())];
}

json CorpusStats::to_json() const {
  return json{{"pair_count", pair_count},
              {"src_tokens", src_tokens},
              {"tgt_tokens", tgt_tokens},
              {"provenance", provenance_counts},
              {"ratio_histogram", ratio_histogram}};
}

RecordFormat record_format_from_string(std::string_view s) {
  if (s == "jsonl") return RecordFormat::kJsonl;
  if (s == "tsv") return RecordFormat::kTsv;
  throw ConfigError("unknown record format: " + std::string(s));
}

json pair_to_json(const SentencePair& pair) {
  json j{{"src", pair.src.text()},
         {"tgt", pair.tgt.text()},
         {"lang_src", pair.src.lang()},
         {"lang_tgt", pair.tgt.lang()},
         {"provenance", to_string(pair.provenance)}};
  if (!pair.scores.empty()) j["scores"] = pair.scores;
  return j;
}

SentencePair pair_from_json(const json& j, const ReaderOptions& options) {
  if (!j.is_object() || !j.contains("src") || !j.contains("tgt") ||
      !j.at("src").is_string() || !j.at("tgt").is_string()) {
    throw FormatError("record missing src/tgt strings");
  }
  try {
    SentencePair pair;
    std::string lang_src = j.value("lang_src", options.default_src_lang);
    std::string lang_tgt = j.value("lang_tgt", options.default_tgt_lang);
    pair.src = Sentence(j.at("src").get<std::string>(), lang_src);
    pair.tgt = Sentence(j.at("tgt").get<std::string>(), lang_tgt);
    if (j.contains("provenance")) {
      pair.provenance =
          provenance_from_string(j.at("provenance").get<std::string>());
    }
    if (j.contains("scores")) {
      for (const auto& [key, value] : j.at("scores").items()) {
        pair.scores[key] = value.get<double>();
      }
    }
    return pair;
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad record: ") + e.what());
  }
}

RecordReader::RecordReader(const std::string& path, RecordFormat format,
                           ReaderOptions options)
    : in_(path, std::ios::binary),
      path_(path),
      format_(format),
      options_(options) {
  if (!in_) throw IoError("cannot open file: " + path);
}

std::optional<SentencePair> RecordReader::parse_line(const std::string& line) {
  if (format_ == RecordFormat::kJsonl) {
    json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) return std::nullopt;
    try {
      return pair_from_json(j, options_);
    } catch (const FormatError&) {
      return std::nullopt;
    }
  }
  // TSV: src \t tgt [\t provenance]
  std::vector<std::string> cols;
  size_t start = 0;
  while (true) {
    size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      cols.push_back(line.substr(start));
      break;
    }
    cols.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  if (cols.size() != 2 && cols.size() != 3) return std::nullopt;
  SentencePair pair;
  pair.src = Sentence(cols[0], options_.default_src_lang);
  pair.tgt = Sentence(cols[1], options_.default_tgt_lang);
  if (cols.size() == 3) {
    try {
      pair.provenance = provenance_from_string(cols[2]);
    } catch (const FormatError&) {
      return std::nullopt;
    }
  }
  return pair;
}

bool RecordReader::next(SentencePair& out) {
  if (finished_) return false;
  std::string line;
  while (std::getline(in_, line)) {
    ++lines_read_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto pair = parse_line(line);
    if (!pair) {
      if (malformed_lines_.size() < 64) malformed_lines_.push_back(lines_read_);
      continue;
    }
    ++records_read_;
    out = std::move(*pair);
    return true;
  }
  if (in_.bad()) throw IoError("read failed: " + path_);
  finished_ = true;
  uint64_t malformed = malformed_count();
  if (lines_read_ > 0 &&
      static_cast<double>(malformed) >
          options_.max_malformed_fraction * static_cast<double>(lines_read_)) {
    std::ostringstream msg;
    msg << path_ << ": " << malformed << " of " << lines_read_
        << " lines malformed (lines";
    for (uint64_t n : malformed_lines_) msg << ' ' << n;
    if (malformed > malformed_lines_.size()) msg << " ...";
    msg << ")";
    throw FormatError(msg.str());
  }
  return false;
}

RecordWriter::RecordWriter(const std::string& path, RecordFormat format)
    : out_(path, std::ios::binary), path_(path), format_(format) {
  if (!out_) throw IoError("cannot open file for writing: " + path);
}

RecordWriter::~RecordWriter() {
  if (!closed_) {
    try {
      close();
    } catch (...) {
      // destructor must not throw; close() explicitly to observe errors
    }
  }
}

std::string record_to_line(const SentencePair& pair, RecordFormat format) {
  if (format == RecordFormat::kJsonl) return pair_to_json(pair).dump();
  return pair.src.text() + '\t' + pair.tgt.text() + '\t' +
         std::string(to_string(pair.provenance));
}

void RecordWriter::write(const SentencePair& pair) {
  out_ << record_to_line(pair, format_) << '\n';
  ++count_;
}

uint64_t RecordWriter::close() {
  closed_ = true;
  out_.flush();
  if (!out_) throw IoError("write failed: " + path_);
  out_.close();
  return count_;
}

std::vector<SentencePair> read_all_records(const std::string& path,
                                           RecordFormat format,
                                           ReaderOptions options) {
  RecordReader reader(path, format, options);
  std::vector<SentencePair> pairs;
  SentencePair pair;
  while (reader.next(pair)) pairs.push_back(std::move(pair));
  return pairs;
}

uint64_t write_all_records(const std::vector<SentencePair>& pairs,
                           const std::string& path, RecordFormat format) {
  RecordWriter writer(path, format);
  for (const auto& pair : pairs) writer.write(pair);
  return writer.close();
}

CorpusStats compute_stats(const std::vector<SentencePair>& pairs) {
  CorpusStats stats;
  for (const auto& pair : pairs) stats.add(pair);
  return stats;
}

CorpusStats compute_stats(RecordReader& reader) {
  CorpusStats stats;
  SentencePair pair;
  while (reader.next(pair)) stats.add(pair);
  return stats;
}

std::vector<Sentence> read_mono(const std::string& path,
                                const std::string& lang) {
  std::vector<Sentence> out;
  for (auto& line : read_lines(path)) {
    if (!line.empty()) out.emplace_back(line, lang);
  }
  return out;
}

void write_mono(const std::vector<Sentence>& sentences,
                const std::string& path) {
  std::vector<std::string> lines;
  lines.reserve(sentences.size());
  for (const auto& s : sentences) lines.push_back(s.text());
  write_lines(lines, path);
}

}  // namespace mtpipe
