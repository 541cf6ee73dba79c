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

#include "mtpipe/preprocess.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mtpipe/error.h"

namespace mtpipe {

using nlohmann::json;

namespace {

// Unicode Cf (format) ranges, Unicode 15.0.
constexpr struct {
  char32_t lo, hi;
} kFormatRanges[] = {
    {0x00AD, 0x00AD},   {0x0600, 0x0605},   {0x061C, 0x061C},
    {0x06DD, 0x06DD},   {0x070F, 0x070F},   {0x0890, 0x0891},
    {0x08E2, 0x08E2},   {0x180E, 0x180E},   {0x200B, 0x200F},
    {0x202A, 0x202E},   {0x2060, 0x2064},   {0x2066, 0x206F},
    {0xFEFF, 0xFEFF},   {0xFFF9, 0xFFFB},   {0x110BD, 0x110BD},
    {0x110CD, 0x110CD}, {0x13430, 0x1343F}, {0x1BCA0, 0x1BCA3},
    {0x1D173, 0x1D17A}, {0xE0001, 0xE0001}, {0xE0020, 0xE007F},
};

bool is_invisible(char32_t cp) {
  if (cp == '\n' || cp == '\t') return false;
  if (cp <= 0x1F || (cp >= 0x7F && cp <= 0x9F)) return true;  // Cc
  for (const auto& r : kFormatRanges) {
    if (cp >= r.lo && cp <= r.hi) return true;
  }
  return false;
}

// Parses one XML escape starting at s[i] == '&'. On success sets cp and
// returns the index just past the ';'; returns npos otherwise.
size_t parse_xml_escape(std::string_view s, size_t i, char32_t* cp) {
  size_t semi = s.find(';', i + 1);
  if (semi == std::string_view::npos || semi - i > 12) {
    return std::string_view::npos;
  }
  std::string_view body = s.substr(i + 1, semi - i - 1);
  if (body == "amp") {
    *cp = '&';
  } else if (body == "lt") {
    *cp = '<';
  } else if (body == "gt") {
    *cp = '>';
  } else if (body == "quot") {
    *cp = '"';
  } else if (body == "apos") {
    *cp = '\'';
  } else if (body.size() > 1 && body[0] == '#') {
    bool hex = body[1] == 'x' || body[1] == 'X';
    std::string_view digits = body.substr(hex ? 2 : 1);
    if (digits.empty()) return std::string_view::npos;
    char32_t value = 0;
    for (char c : digits) {
      int d;
      if (c >= '0' && c <= '9') {
        d = c - '0';
      } else if (hex && c >= 'a' && c <= 'f') {
        d = c - 'a' + 10;
      } else if (hex && c >= 'A' && c <= 'F') {
        d = c - 'A' + 10;
      } else {
        return std::string_view::npos;
      }
      value = value * (hex ? 16 : 10) + d;
      if (value > 0x10FFFF) return std::string_view::npos;
    }
    *cp = value;
  } else {
    return std::string_view::npos;
  }
  return semi + 1;
}

}  // namespace

std::string strip_invisible(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  size_t i = 0;
  auto emit = [&](char32_t cp) {
    if (!is_invisible(cp)) append_utf8(out, cp);
  };
  while (i < text.size()) {
    if (text[i] == '&') {
      char32_t cp = 0;
      size_t after = parse_xml_escape(text, i, &cp);
      if (after != std::string_view::npos) {
        // Decoded output is not rescanned, so escapes decode exactly once.
        emit(cp);
        i = after;
        continue;
      }
    }
    unsigned char b = text[i];
    if (b < 0x80) {
      emit(b);
      ++i;
    } else {
      size_t len = 1;
      if ((b & 0xE0) == 0xC0) len = 2;
      else if ((b & 0xF0) == 0xE0) len = 3;
      else if ((b & 0xF8) == 0xF0) len = 4;
      len = std::min(len, text.size() - i);
      auto cps = decode_utf8(std::string_view(text).substr(i, len));
      for (char32_t cp : cps) emit(cp);
      i += len;
    }
  }
  return out;
}

std::string normalize_width(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (char32_t cp : decode_utf8(text)) {
    if (cp >= 0xFF01 && cp <= 0xFF5E) {
      cp -= 0xFEE0;
    } else if (cp == 0x3000) {
      cp = 0x20;
    }
    append_utf8(out, cp);
  }
  return out;
}

std::string normalize_punct(const std::string& text) {
  std::string replaced;
  replaced.reserve(text.size());
  for (char32_t cp : decode_utf8(text)) {
    switch (cp) {
      case 0x2018:
      case 0x2019:
        replaced.push_back('\'');
        break;
      case 0x201C:
      case 0x201D:
        replaced.push_back('"');
        break;
      case 0x2013:
      case 0x2014:
        replaced.push_back('-');
        break;
      case 0x2026:
        replaced += "...";
        break;
      case 0x00A0:
        replaced.push_back(' ');
        break;
      default:
        append_utf8(replaced, cp);
    }
  }
  std::string out;
  out.reserve(replaced.size());
  bool prev_space = false;
  for (char c : replaced) {
    if (c == ' ') {
      if (!prev_space) out.push_back(c);
      prev_space = true;
    } else {
      out.push_back(c);
      prev_space = false;
    }
  }
  return out;
}

T2sTable T2sTable::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open mapping file: " + path);
  T2sTable table;
  std::string line;
  uint64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected trad<TAB>simp");
    }
    auto from = decode_utf8(std::string_view(line).substr(0, tab));
    auto to = decode_utf8(std::string_view(line).substr(tab + 1));
    if (from.size() != 1 || to.size() != 1) {
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": mapping sides must be single codepoints");
    }
    table.map_[from[0]] = to[0];
  }
  return table;
}

T2sTable T2sTable::from_pairs(
    const std::vector<std::pair<char32_t, char32_t>>& pairs) {
  T2sTable table;
  for (const auto& [from, to] : pairs) table.map_[from] = to;
  return table;
}

std::string T2sTable::convert(const std::string& text) const {
  if (map_.empty()) return text;
  std::string out;
  out.reserve(text.size());
  for (char32_t cp : decode_utf8(text)) {
    auto it = map_.find(cp);
    append_utf8(out, it == map_.end() ? cp : it->second);
  }
  return out;
}

std::string dedup_key(const SentencePair& pair) {
  return nfc_normalize(normalize_width(pair.src.text())) + '\x1F' +
         nfc_normalize(normalize_width(pair.tgt.text()));
}

bool Deduper::seen_before(const SentencePair& pair) {
  return !seen_.insert(fnv1a128(dedup_key(pair))).second;
}

std::vector<SentencePair> dedup(const std::vector<SentencePair>& pairs) {
  Deduper deduper;
  std::vector<SentencePair> out;
  out.reserve(pairs.size());
  for (const auto& pair : pairs) {
    if (!deduper.seen_before(pair)) out.push_back(pair);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Language identification

std::vector<std::string> LidModel::events_of(const std::string& text) const {
  std::vector<char32_t> cps;
  cps.push_back(0x02);  // begin sentinel
  for (char32_t cp : decode_utf8(text)) {
    if (!is_space_cp(cp)) cps.push_back(cp);
  }
  cps.push_back(0x03);  // end sentinel
  std::vector<std::string> events;
  int n = options_.order;
  if (cps.size() < static_cast<size_t>(n)) {
    std::string whole;
    for (char32_t cp : cps) append_utf8(whole, cp);
    events.push_back(whole);
    return events;
  }
  for (size_t i = 0; i + n <= cps.size(); ++i) {
    std::string gram;
    for (int j = 0; j < n; ++j) append_utf8(gram, cps[i + j]);
    events.push_back(std::move(gram));
  }
  return events;
}

LidModel LidModel::train(const std::map<std::string, std::string>& samples,
                         Options options) {
  if (samples.size() < 2) {
    throw ConfigError("LID training needs at least 2 languages");
  }
  LidModel model;
  model.options_ = options;
  for (const auto& [lang, sample] : samples) {
    if (sample.empty()) {
      throw ConfigError("LID training sample for '" + lang + "' is empty");
    }
    model.langs_.push_back(lang);
  }

  // Shared event space over all languages.
  std::vector<std::unordered_map<std::string, uint64_t>> counts(
      model.langs_.size());
  for (size_t li = 0; li < model.langs_.size(); ++li) {
    std::istringstream in(samples.at(model.langs_[li]));
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      for (auto& event : model.events_of(line)) {
        ++counts[li][event];
        if (!model.event_index_.count(event)) {
          size_t id = model.event_index_.size();
          model.event_index_.emplace(event, id);
        }
      }
    }
  }

  size_t space = model.event_index_.size() + 1;  // plus one unseen slot
  double k = options.k;
  model.logprob_.assign(model.langs_.size(),
                        std::vector<double>(space, 0.0));
  for (size_t li = 0; li < model.langs_.size(); ++li) {
    uint64_t total = 0;
    for (const auto& [event, c] : counts[li]) total += c;
    double denom = static_cast<double>(total) + k * static_cast<double>(space);
    for (size_t e = 0; e < space; ++e) model.logprob_[li][e] = k / denom;
    for (const auto& [event, c] : counts[li]) {
      model.logprob_[li][model.event_index_.at(event)] =
          (static_cast<double>(c) + k) / denom;
    }
    for (double& p : model.logprob_[li]) {
      p = std::log(std::max(p, options.floor));
    }
  }
  return model;
}

double LidModel::event_prob(const std::string& lang,
                            const std::string& event) const {
  auto lang_it = std::find(langs_.begin(), langs_.end(), lang);
  if (lang_it == langs_.end()) throw InputError("unknown language: " + lang);
  size_t li = lang_it - langs_.begin();
  auto it = event_index_.find(event);
  if (it == event_index_.end()) return options_.floor;
  return std::exp(logprob_[li][it->second]);
}

double LidModel::score(const std::string& lang,
                       const std::string& text) const {
  auto lang_it = std::find(langs_.begin(), langs_.end(), lang);
  if (lang_it == langs_.end()) throw InputError("unknown language: " + lang);
  size_t li = lang_it - langs_.begin();
  double floor_log = std::log(options_.floor);
  double total = 0.0;
  for (const auto& event : events_of(text)) {
    auto it = event_index_.find(event);
    total += it == event_index_.end() ? floor_log : logprob_[li][it->second];
  }
  return total;
}

std::pair<std::string, double> LidModel::classify(
    const std::string& text) const {
  if (text.empty()) throw ScoreError("cannot classify empty text");
  size_t best = 0, second = 1;
  std::vector<double> totals(langs_.size());
  for (size_t li = 0; li < langs_.size(); ++li) {
    totals[li] = score(langs_[li], text);
  }
  if (totals[second] > totals[best]) std::swap(best, second);
  for (size_t li = 2; li < langs_.size(); ++li) {
    if (totals[li] > totals[best]) {
      second = best;
      best = li;
    } else if (totals[li] > totals[second]) {
      second = li;
    }
  }
  double chars = static_cast<double>(std::max<size_t>(
      codepoint_count(text), 1));
  double margin = (totals[best] - totals[second]) / chars;
  return {langs_[best], margin};
}

// ---------------------------------------------------------------------------
// IBM Model 1

double TranslationTable::corpus_loglik(
    const std::vector<SentencePair>& pairs) const {
  double ll = 0.0;
  for (const auto& pair : pairs) {
    const auto& src = pair.src.tokens();
    const auto& tgt = pair.tgt.tokens();
    if (src.empty() || tgt.empty()) continue;
    double denom_positions = static_cast<double>(src.size() + 1);
    for (const auto& f : tgt) {
      double sum = prob(f, kNullToken);
      for (const auto& e : src) sum += prob(f, e);
      ll += std::log(std::max(sum, floor_)) - std::log(denom_positions);
    }
  }
  return ll;
}

TranslationTable TranslationTable::train(
    const std::vector<SentencePair>& pairs, int iterations) {
  if (iterations < 1) throw ConfigError("ibm1: iterations must be >= 1");
  std::vector<const SentencePair*> usable;
  for (const auto& pair : pairs) {
    if (!pair.src.tokens().empty() && !pair.tgt.tokens().empty()) {
      usable.push_back(&pair);
    }
  }
  if (usable.empty()) throw ConfigError("ibm1: empty training corpus");

  TranslationTable table;
  // Uniform initialization over co-occurring (e, f).
  for (const auto* pair : usable) {
    for (const auto& f : pair->tgt.tokens()) {
      table.t_[kNullToken][f] = 1.0;
      for (const auto& e : pair->src.tokens()) table.t_[e][f] = 1.0;
    }
  }
  for (auto& [e, row] : table.t_) {
    double uniform = 1.0 / static_cast<double>(row.size());
    for (auto& [f, p] : row) p = uniform;
  }

  for (int it = 0; it < iterations; ++it) {
    std::unordered_map<std::string, std::unordered_map<std::string, double>>
        counts;
    double ll = 0.0;
    for (const auto* pair : usable) {
      const auto& src = pair->src.tokens();
      const auto& tgt = pair->tgt.tokens();
      double denom_positions = static_cast<double>(src.size() + 1);
      for (const auto& f : tgt) {
        double denom = table.t_[kNullToken][f];
        for (const auto& e : src) denom += table.t_[e][f];
        ll += std::log(denom) - std::log(denom_positions);
        counts[kNullToken][f] += table.t_[kNullToken][f] / denom;
        for (const auto& e : src) counts[e][f] += table.t_[e][f] / denom;
      }
    }
    table.loglik_.push_back(ll);
    for (auto& [e, row] : counts) {
      double total = 0.0;
      for (const auto& [f, c] : row) total += c;
      auto& t_row = table.t_[e];
      for (const auto& [f, c] : row) t_row[f] = c / total;
    }
  }
  table.loglik_.push_back(table.corpus_loglik(pairs));
  return table;
}

double TranslationTable::prob(const std::string& tgt_token,
                              const std::string& src_token) const {
  auto row = t_.find(src_token);
  if (row == t_.end()) return 0.0;
  auto it = row->second.find(tgt_token);
  return it == row->second.end() ? 0.0 : it->second;
}

double TranslationTable::align_score(const SentencePair& pair) const {
  const auto& src = pair.src.tokens();
  const auto& tgt = pair.tgt.tokens();
  if (src.empty() || tgt.empty()) {
    throw ScoreError("align_score: empty sentence side");
  }
  double total = 0.0;
  for (const auto& f : tgt) {
    double best = prob(f, kNullToken);
    for (const auto& e : src) best = std::max(best, prob(f, e));
    total += std::log(std::max(best, floor_));
  }
  return total / static_cast<double>(tgt.size());
}

std::vector<std::string> TranslationTable::source_vocab() const {
  std::vector<std::string> vocab;
  vocab.reserve(t_.size());
  for (const auto& [e, row] : t_) vocab.push_back(e);
  std::sort(vocab.begin(), vocab.end());
  return vocab;
}

double TranslationTable::row_sum(const std::string& src_token) const {
  auto row = t_.find(src_token);
  if (row == t_.end()) return 0.0;
  double sum = 0.0;
  for (const auto& [f, p] : row->second) sum += p;
  return sum;
}

void TranslationTable::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open file for writing: " + path);
  out << "ibm1-v1\n";
  // Sorted for reproducible files.
  std::vector<std::string> vocab = source_vocab();
  for (const auto& e : vocab) {
    std::vector<std::pair<std::string, double>> row(t_.at(e).begin(),
                                                    t_.at(e).end());
    std::sort(row.begin(), row.end());
    for (const auto& [f, p] : row) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.17g", p);
      out << e << '\t' << f << '\t' << buf << '\n';
    }
  }
  if (!out) throw IoError("write failed: " + path);
}

TranslationTable TranslationTable::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  std::string line;
  if (!std::getline(in, line) || line != "ibm1-v1") {
    throw FormatError(path + ": bad translation table header");
  }
  TranslationTable table;
  uint64_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    size_t t1 = line.find('\t');
    size_t t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos) {
      throw FormatError(path + ":" + std::to_string(lineno) +
                        ": expected e<TAB>f<TAB>prob");
    }
    std::string e = line.substr(0, t1);
    std::string f = line.substr(t1 + 1, t2 - t1 - 1);
    table.t_[e][f] = std::stod(line.substr(t2 + 1));
  }
  return table;
}

// ---------------------------------------------------------------------------
// Filter chain

json FilterReport::to_json() const {
  json filters = json::array();
  for (const auto& entry : entries) {
    filters.push_back(json{{"name", entry.name},
                           {"kept", entry.kept},
                           {"dropped", entry.dropped},
                           {"rejected_samples", entry.rejected_samples}});
  }
  return json{{"input_count", input_count},
              {"output_count", output_count},
              {"filters", filters}};
}

namespace {

enum class Side { kSrc, kTgt, kBoth };

Side side_from_config(const json& config) {
  std::string side = config.value("side", "both");
  if (side == "src") return Side::kSrc;
  if (side == "tgt") return Side::kTgt;
  if (side == "both") return Side::kBoth;
  throw ConfigError("filter side must be src, tgt or both");
}

constexpr size_t kMaxRejectedSamples = 5;

}  // namespace

struct FilterChain::Step {
  explicit Step(std::string name) : name(std::move(name)) {}
  virtual ~Step() = default;
  // Returns false to drop the pair; may rewrite it in place.
  virtual bool apply(SentencePair& pair) = 0;
  std::string name;
};

namespace {

using Step = FilterChain::Step;

struct DedupStep : Step {
  explicit DedupStep(const json&) : Step("dedup") {}
  bool apply(SentencePair& pair) override {
    return !deduper.seen_before(pair);
  }
  Deduper deduper;
};

struct TransformStep : Step {
  TransformStep(std::string name, const json& config,
                std::string (*fn)(const std::string&))
      : Step(std::move(name)), side(side_from_config(config)), fn(fn) {}
  bool apply(SentencePair& pair) override {
    if (side != Side::kTgt) {
      pair.src = Sentence(fn(pair.src.text()), pair.src.lang());
    }
    if (side != Side::kSrc) {
      pair.tgt = Sentence(fn(pair.tgt.text()), pair.tgt.lang());
    }
    return true;
  }
  Side side;
  std::string (*fn)(const std::string&);
};

struct T2sStep : Step {
  T2sStep(const json& config, const T2sTable* table)
      : Step("t2s"), side(side_from_config(config)), table(table) {
    if (table == nullptr) {
      throw ConfigError("t2s filter requires a mapping table");
    }
  }
  bool apply(SentencePair& pair) override {
    if (side != Side::kTgt) {
      pair.src = Sentence(table->convert(pair.src.text()), pair.src.lang());
    }
    if (side != Side::kSrc) {
      pair.tgt = Sentence(table->convert(pair.tgt.text()), pair.tgt.lang());
    }
    return true;
  }
  Side side;
  const T2sTable* table;
};

struct LidStep : Step {
  LidStep(const json& config, const LidModel* model)
      : Step("lid"),
        side(side_from_config(config)),
        min_margin(config.value("min_margin", 0.0)),
        model(model) {
    if (model == nullptr) throw ConfigError("lid filter requires a model");
  }
  bool side_ok(const Sentence& s) const {
    if (s.empty()) return false;
    auto [lang, margin] = model->classify(s.text());
    return lang == s.lang() && margin >= min_margin;
  }
  bool apply(SentencePair& pair) override {
    if (side != Side::kTgt && !side_ok(pair.src)) return false;
    if (side != Side::kSrc && !side_ok(pair.tgt)) return false;
    return true;
  }
  Side side;
  double min_margin;
  const LidModel* model;
};

struct AlignStep : Step {
  AlignStep(const json& config, const TranslationTable* table)
      : Step("align"),
        min_score(config.value("min_score", -6.0)),
        table(table) {
    if (table == nullptr) {
      throw ConfigError("align filter requires a translation table");
    }
  }
  bool apply(SentencePair& pair) override {
    if (pair.src.tokens().empty() || pair.tgt.tokens().empty()) return false;
    return table->align_score(pair) >= min_score;
  }
  double min_score;
  const TranslationTable* table;
};

struct MaxTokensStep : Step {
  explicit MaxTokensStep(const json& config)
      : Step("max_tokens"),
        max_tokens(config.value("max_tokens", uint64_t{150})) {}
  bool apply(SentencePair& pair) override {
    return pair.src.token_count() <= max_tokens &&
           pair.tgt.token_count() <= max_tokens;
  }
  uint64_t max_tokens;
};

struct RatioStep : Step {
  explicit RatioStep(const json& config)
      : Step("ratio"),
        hi(config.value("ratio_hi", 4.0)),
        lo(config.value("ratio_lo", 0.25)) {}
  bool apply(SentencePair& pair) override {
    if (pair.tgt.token_count() == 0) return false;
    if (pair.src.token_count() == 0) return false;
    double ratio = static_cast<double>(pair.src.token_count()) /
                   static_cast<double>(pair.tgt.token_count());
    // Strict bounds: drop only when ratio > hi or ratio < lo.
    return !(ratio > hi || ratio < lo);
  }
  double hi, lo;
};

}  // namespace

const std::vector<std::string> FilterChain::kFilterNames = {
    "dedup",      "strip_invisible", "normalize_width", "normalize_punct",
    "t2s",        "lid",             "align",           "max_tokens",
    "ratio"};

FilterChain::~FilterChain() = default;
FilterChain::FilterChain(FilterChain&&) noexcept = default;
FilterChain& FilterChain::operator=(FilterChain&&) noexcept = default;

FilterChain::FilterChain(const json& filters_config,
                         FilterResources resources) {
  if (!filters_config.is_array()) {
    throw ConfigError("filter config must be an array of filter objects");
  }
  for (const auto& entry : filters_config) {
    std::string name = entry.value("name", "");
    if (name == "dedup") {
      steps_.push_back(std::make_unique<DedupStep>(entry));
      stateful_ = true;
    } else if (name == "strip_invisible") {
      steps_.push_back(
          std::make_unique<TransformStep>(name, entry, &strip_invisible));
    } else if (name == "normalize_width") {
      steps_.push_back(
          std::make_unique<TransformStep>(name, entry, &normalize_width));
    } else if (name == "normalize_punct") {
      steps_.push_back(
          std::make_unique<TransformStep>(name, entry, &normalize_punct));
    } else if (name == "t2s") {
      steps_.push_back(std::make_unique<T2sStep>(entry, resources.t2s));
    } else if (name == "lid") {
      steps_.push_back(std::make_unique<LidStep>(entry, resources.lid));
    } else if (name == "align") {
      steps_.push_back(std::make_unique<AlignStep>(entry, resources.align));
    } else if (name == "max_tokens") {
      steps_.push_back(std::make_unique<MaxTokensStep>(entry));
    } else if (name == "ratio") {
      steps_.push_back(std::make_unique<RatioStep>(entry));
    } else {
      throw ConfigError("unknown filter: '" + name + "'");
    }
  }
  report_.entries.resize(steps_.size());
  for (size_t i = 0; i < steps_.size(); ++i) {
    report_.entries[i].name = steps_[i]->name;
  }
}

bool FilterChain::process(SentencePair& pair) {
  ++report_.input_count;
  for (size_t i = 0; i < steps_.size(); ++i) {
    if (steps_[i]->apply(pair)) {
      ++report_.entries[i].kept;
      continue;
    }
    ++report_.entries[i].dropped;
    auto& samples = report_.entries[i].rejected_samples;
    if (samples.size() < kMaxRejectedSamples) {
      std::string sample = pair.src.text().substr(0, 120) + " ||| " +
                           pair.tgt.text().substr(0, 120);
      samples.push_back(std::move(sample));
    }
    return false;
  }
  ++report_.output_count;
  return true;
}

std::pair<std::vector<SentencePair>, FilterReport> filter_chain(
    const std::vector<SentencePair>& pairs, const json& config,
    FilterResources resources) {
  FilterChain chain(config, resources);
  std::vector<SentencePair> kept;
  for (const auto& pair : pairs) {
    SentencePair copy = pair;
    if (chain.process(copy)) kept.push_back(std::move(copy));
  }
  return {std::move(kept), chain.report()};
}

// ---------------------------------------------------------------------------
// Monolingual sentence splitting

namespace {

bool ends_sentence(const std::string& token) {
  auto cps = decode_utf8(token);
  if (cps.empty()) return false;
  char32_t last = cps.back();
  return last == '.' || last == '!' || last == '?' || last == 0x3002 ||
         last == 0xFF01 || last == 0xFF1F;
}

}  // namespace

std::vector<Sentence> split_long(const Sentence& sentence, int max_len) {
  if (max_len < 1) throw ConfigError("split_long: max_len must be >= 1");
  const auto& tokens = sentence.tokens();
  TokenizerKind kind = sentence.tokenizer();
  std::vector<Sentence> out;
  size_t n = tokens.size();
  if (n == 0) return out;
  size_t begin = 0;
  while (begin < n) {
    size_t remaining = n - begin;
    size_t take;
    if (remaining <= static_cast<size_t>(max_len)) {
      take = remaining;
    } else {
      take = static_cast<size_t>(max_len);  // hard split fallback
      for (size_t j = begin + max_len; j-- > begin;) {
        if (ends_sentence(tokens[j])) {
          take = j - begin + 1;
          break;
        }
      }
    }
    std::vector<std::string> segment(tokens.begin() + begin,
                                     tokens.begin() + begin + take);
    out.emplace_back(join_tokens(segment, kind), sentence.lang());
    begin += take;
  }
  return out;
}

std::vector<Sentence> split_long(const std::vector<Sentence>& mono,
                                 int max_len) {
  std::vector<Sentence> out;
  for (const auto& sentence : mono) {
    auto pieces = split_long(sentence, max_len);
    out.insert(out.end(), pieces.begin(), pieces.end());
  }
  return out;
}

}  // namespace mtpipe
