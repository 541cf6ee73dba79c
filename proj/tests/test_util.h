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

#ifndef MTPIPE_TESTS_TEST_UTIL_H_
#define MTPIPE_TESTS_TEST_UTIL_H_

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "mtpipe/corpus.h"

namespace testutil {

class TempDir {
 public:
  TempDir() {
    auto base = std::filesystem::temp_directory_path();
    std::random_device rd;
    for (int i = 0; i < 100; ++i) {
      auto candidate = base / ("mtpipe_test_" + std::to_string(rd()));
      std::error_code ec;
      if (std::filesystem::create_directory(candidate, ec)) {
        path_ = candidate;
        return;
      }
    }
    throw std::runtime_error("cannot create temp dir");
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const {
    return (path_ / name).string();
  }

  std::string path() const { return path_.string(); }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << content;
}

inline std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline mtpipe::SentencePair make_pair(
    const std::string& src, const std::string& tgt,
    mtpipe::Provenance provenance = mtpipe::Provenance::kAuthentic,
    const std::string& src_lang = "en", const std::string& tgt_lang = "en") {
  mtpipe::SentencePair pair;
  pair.src = mtpipe::Sentence(src, src_lang);
  pair.tgt = mtpipe::Sentence(tgt, tgt_lang);
  pair.provenance = provenance;
  return pair;
}

// Lowercase word over a small alphabet; short words keep merge pairs frequent.
inline std::string random_word(std::mt19937_64& rng, int max_len = 6) {
  static const char kAlphabet[] = "abcdef";
  std::uniform_int_distribution<int> len_dist(1, max_len);
  std::uniform_int_distribution<int> chr_dist(0, 5);
  int len = len_dist(rng);
  std::string word;
  for (int i = 0; i < len; ++i) word.push_back(kAlphabet[chr_dist(rng)]);
  return word;
}

inline std::vector<std::string> random_sentence(std::mt19937_64& rng,
                                                int max_words = 8) {
  std::uniform_int_distribution<int> count_dist(1, max_words);
  int count = count_dist(rng);
  std::vector<std::string> words;
  words.reserve(count);
  for (int i = 0; i < count; ++i) words.push_back(random_word(rng));
  return words;
}

struct CliResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr interleaved
};

// Runs the mtpipe binary (path baked in at compile time) with the given
// argument string.
inline CliResult run_cli(const std::string& args) {
  std::string cmd = std::string(MTPIPE_BIN) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) throw std::runtime_error("popen failed");
  CliResult result;
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0) {
    result.output.append(buf, n);
  }
  int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

}  // namespace testutil

#endif  // MTPIPE_TESTS_TEST_UTIL_H_
