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

#ifndef MTPIPE_SUBWORD_H_
#define MTPIPE_SUBWORD_H_

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "mtpipe/corpus.h"

namespace mtpipe {

// Byte-pair-encoding subword model. Words are split into codepoint symbols
// plus a final "</w>" marker symbol; learning repeatedly merges the most
// frequent adjacent symbol pair, breaking ties by lexicographic (left, right)
// order. At apply time a still-standalone trailing marker is folded into the
// preceding symbol, so every output word ends in a symbol carrying "</w>".
//
// Tokens in the protected set (the back-translation tag by default) are
// never split or merged; they pass through as single marker-terminated
// units. The protected set is a runtime setting and is not serialized.
class BpeModel {
 public:
  static constexpr const char* kMarker = "</w>";
  static constexpr const char* kDefaultProtected = "<BT>";

  struct LearnOptions {
    std::set<std::string> protected_tokens = {kDefaultProtected};
  };

  // Learns from pooled word frequencies over all streams, so one shared
  // merge table serves every language involved. Stops early if no adjacent
  // pair is left to merge. Throws ConfigError if num_merges < 0 or no
  // countable token exists.
  static BpeModel learn(const std::vector<std::vector<std::string>>& corpora,
                        int num_merges, LearnOptions options);
  static BpeModel learn(const std::vector<std::vector<std::string>>& corpora,
                        int num_merges) {
    return learn(corpora, num_merges, LearnOptions());
  }

  std::vector<std::string> apply_word(const std::string& word) const;
  std::vector<std::string> apply(const std::vector<std::string>& tokens) const;
  std::vector<std::string> apply(const Sentence& sentence) const;

  const std::vector<std::pair<std::string, std::string>>& merges() const {
    return merges_;
  }
  const std::set<std::string>& vocab() const { return vocab_; }
  const std::set<std::string>& protected_tokens() const { return protected_; }

  // Plain-text model file: "bpe-v1 <num_merges>" header, then one
  // "left<SPACE>right" merge per line in learned order.
  void save(const std::string& path) const;
  static BpeModel load(const std::string& path,
                       std::set<std::string> protected_tokens = {
                           kDefaultProtected});

 private:
  std::vector<std::pair<std::string, std::string>> merges_;
  std::map<std::pair<std::string, std::string>, int> merge_rank_;
  std::set<std::string> vocab_;
  std::set<std::string> protected_;
};

// Inverse of BpeModel::apply: concatenates continuation symbols and closes a
// word at each "</w>". Throws DecodeError when a marker appears anywhere but
// a token suffix, a word would be empty, or the input ends mid-word.
std::vector<std::string> bpe_decode(const std::vector<std::string>& tokens);

}  // namespace mtpipe

#endif  // MTPIPE_SUBWORD_H_
