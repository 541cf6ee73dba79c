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

#include "mtpipe/subword.h"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <queue>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "mtpipe/error.h"
#include "mtpipe/text.h"

namespace mtpipe {

namespace {

using SymbolPair = std::pair<std::string, std::string>;

std::vector<std::string> word_symbols(const std::string& word) {
  std::vector<std::string> symbols;
  for (char32_t cp : decode_utf8(word)) {
    std::string s;
    append_utf8(s, cp);
    symbols.push_back(std::move(s));
  }
  symbols.push_back(BpeModel::kMarker);
  return symbols;
}

struct PairHash {
  size_t operator()(const SymbolPair& p) const {
    return std::hash<std::string>()(p.first) * 1000003u ^
           std::hash<std::string>()(p.second);
  }
};

// Max-heap entry; stale frequencies are skipped at pop time.
struct HeapEntry {
  int64_t freq;
  SymbolPair pair;
  bool operator<(const HeapEntry& other) const {
    if (freq != other.freq) return freq < other.freq;
    return pair > other.pair;  // smaller pair wins ties
  }
};

}  // namespace

BpeModel BpeModel::learn(const std::vector<std::vector<std::string>>& corpora,
                         int num_merges, LearnOptions options) {
  if (num_merges < 0) throw ConfigError("bpe: num_merges must be >= 0");

  std::map<std::string, int64_t> word_freq;
  for (const auto& stream : corpora) {
    for (const auto& token : stream) {
      if (token.empty() || options.protected_tokens.count(token)) continue;
      ++word_freq[token];
    }
  }
  if (word_freq.empty()) throw ConfigError("bpe: empty training corpus");

  BpeModel model;
  model.protected_ = std::move(options.protected_tokens);

  struct Word {
    std::vector<std::string> symbols;
    int64_t freq;
  };
  std::vector<Word> words;
  words.reserve(word_freq.size());
  for (const auto& [word, freq] : word_freq) {
    words.push_back({word_symbols(word), freq});
    for (const auto& s : words.back().symbols) model.vocab_.insert(s);
  }

  std::unordered_map<SymbolPair, int64_t, PairHash> pair_freq;
  std::unordered_map<SymbolPair, std::unordered_set<size_t>, PairHash>
      pair_words;
  for (size_t wi = 0; wi < words.size(); ++wi) {
    const auto& symbols = words[wi].symbols;
    for (size_t i = 0; i + 1 < symbols.size(); ++i) {
      SymbolPair p{symbols[i], symbols[i + 1]};
      pair_freq[p] += words[wi].freq;
      pair_words[p].insert(wi);
    }
  }

  std::priority_queue<HeapEntry> heap;
  for (const auto& [pair, freq] : pair_freq) heap.push({freq, pair});

  for (int merge = 0; merge < num_merges && !heap.empty();) {
    HeapEntry top = heap.top();
    heap.pop();
    auto it = pair_freq.find(top.pair);
    if (it == pair_freq.end() || it->second <= 0) continue;
    if (it->second != top.freq) {
      heap.push({it->second, top.pair});  // refresh stale entry
      continue;
    }

    const SymbolPair best = top.pair;
    std::string merged = best.first + best.second;
    model.merges_.push_back(best);
    model.merge_rank_[best] = merge;
    model.vocab_.insert(merged);
    ++merge;

    // Rewrite only the words containing the merged pair, adjusting pair
    // counts by removing each affected word's old pairs and adding the new.
    auto affected = pair_words[best];
    std::vector<SymbolPair> touched;
    for (size_t wi : affected) {
      auto& word = words[wi];
      for (size_t i = 0; i + 1 < word.symbols.size(); ++i) {
        SymbolPair p{word.symbols[i], word.symbols[i + 1]};
        pair_freq[p] -= word.freq;
        pair_words[p].erase(wi);
        touched.push_back(p);
      }
      std::vector<std::string> rewritten;
      rewritten.reserve(word.symbols.size());
      for (size_t i = 0; i < word.symbols.size();) {
        if (i + 1 < word.symbols.size() && word.symbols[i] == best.first &&
            word.symbols[i + 1] == best.second) {
          rewritten.push_back(merged);
          i += 2;
        } else {
          rewritten.push_back(word.symbols[i]);
          ++i;
        }
      }
      word.symbols = std::move(rewritten);
      for (size_t i = 0; i + 1 < word.symbols.size(); ++i) {
        SymbolPair p{word.symbols[i], word.symbols[i + 1]};
        pair_freq[p] += word.freq;
        pair_words[p].insert(wi);
        touched.push_back(p);
      }
    }
    for (const auto& p : touched) {
      auto fit = pair_freq.find(p);
      if (fit != pair_freq.end() && fit->second > 0) {
        heap.push({fit->second, p});
      }
    }
    pair_freq.erase(best);
    pair_words.erase(best);
  }
  return model;
}

std::vector<std::string> BpeModel::apply_word(const std::string& word) const {
  if (word.empty()) return {};
  if (protected_.count(word)) return {word + kMarker};

  std::vector<std::string> symbols = word_symbols(word);
  while (symbols.size() > 1) {
    int best_rank = -1;
    size_t best_pos = 0;
    for (size_t i = 0; i + 1 < symbols.size(); ++i) {
      auto it = merge_rank_.find({symbols[i], symbols[i + 1]});
      if (it != merge_rank_.end() &&
          (best_rank < 0 || it->second < best_rank)) {
        best_rank = it->second;
        best_pos = i;
      }
    }
    if (best_rank < 0) break;
    const auto& pair = merges_[best_rank];
    std::vector<std::string> rewritten;
    rewritten.reserve(symbols.size());
    for (size_t i = 0; i < symbols.size();) {
      if (i + 1 < symbols.size() && symbols[i] == pair.first &&
          symbols[i + 1] == pair.second) {
        rewritten.push_back(pair.first + pair.second);
        i += 2;
      } else {
        rewritten.push_back(symbols[i]);
        ++i;
      }
    }
    symbols = std::move(rewritten);
  }
  if (symbols.size() > 1 && symbols.back() == kMarker) {
    symbols.pop_back();
    symbols.back() += kMarker;
  }
  return symbols;
}

std::vector<std::string> BpeModel::apply(
    const std::vector<std::string>& tokens) const {
  std::vector<std::string> out;
  for (const auto& token : tokens) {
    auto pieces = apply_word(token);
    out.insert(out.end(), pieces.begin(), pieces.end());
  }
  return out;
}

std::vector<std::string> BpeModel::apply(const Sentence& sentence) const {
  return apply(sentence.tokens());
}

void BpeModel::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open file for writing: " + path);
  out << "bpe-v1 " << merges_.size() << '\n';
  for (const auto& [left, right] : merges_) {
    out << left << ' ' << right << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

BpeModel BpeModel::load(const std::string& path,
                        std::set<std::string> protected_tokens) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  std::string header;
  if (!std::getline(in, header)) throw FormatError(path + ": empty model file");
  std::istringstream hs(header);
  std::string magic;
  uint64_t count = 0;
  if (!(hs >> magic >> count) || magic != "bpe-v1") {
    throw FormatError(path + ": bad model header");
  }
  BpeModel model;
  model.protected_ = std::move(protected_tokens);
  model.vocab_.insert(kMarker);
  std::string line;
  for (uint64_t i = 0; i < count; ++i) {
    if (!std::getline(in, line)) {
      throw FormatError(path + ": truncated merge list");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    size_t space = line.find(' ');
    if (space == std::string::npos || space == 0 ||
        space + 1 == line.size()) {
      throw FormatError(path + ":" + std::to_string(i + 2) +
                        ": expected left<SPACE>right");
    }
    SymbolPair pair{line.substr(0, space), line.substr(space + 1)};
    if (model.merge_rank_.count(pair)) {
      throw FormatError(path + ": duplicate merge");
    }
    model.merge_rank_[pair] = static_cast<int>(model.merges_.size());
    model.vocab_.insert(pair.first);
    model.vocab_.insert(pair.second);
    model.vocab_.insert(pair.first + pair.second);
    model.merges_.push_back(std::move(pair));
  }
  return model;
}

std::vector<std::string> bpe_decode(const std::vector<std::string>& tokens) {
  static const std::string marker = BpeModel::kMarker;
  std::vector<std::string> words;
  std::string current;
  for (const auto& token : tokens) {
    size_t pos = token.find(marker);
    if (pos == std::string::npos) {
      current += token;
      continue;
    }
    if (pos + marker.size() != token.size()) {
      throw DecodeError("marker inside token: '" + token + "'");
    }
    current += token.substr(0, pos);
    if (current.empty()) throw DecodeError("empty word before marker");
    words.push_back(std::move(current));
    current.clear();
  }
  if (!current.empty()) {
    throw DecodeError("input ends mid-word: '" + current + "'");
  }
  return words;
}

}  // namespace mtpipe
