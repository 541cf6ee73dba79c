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

#include <string>
#include <string_view>
#include <vector>

namespace mtpipe {

// UTF-8 helpers. Invalid byte sequences decode to U+FFFD, one replacement
// per offending byte.
std::vector<char32_t> decode_utf8(std::string_view s);
void append_utf8(std::string& out, char32_t cp);
std::string encode_utf8(const std::vector<char32_t>& cps);
size_t codepoint_count(std::string_view s);

// Canonical composition (NFC), backed by ICU.
std::string nfc_normalize(const std::string& s);

bool is_space_cp(char32_t cp);
// CJK ideographs, kana, hangul and CJK punctuation; these tokenize one
// codepoint per token.
bool is_cjk_cp(char32_t cp);

enum class TokenizerKind { kWhitespace, kCjkChar };

// Whitespace tokenization for space-delimited languages, per-codepoint for
// CJK ones. The kind in use is recorded in pipeline manifests so token
// ratios stay reproducible.
TokenizerKind tokenizer_for_lang(std::string_view lang);
const char* to_string(TokenizerKind kind);

std::vector<std::string> tokenize(std::string_view text, TokenizerKind kind);

// Inverse of tokenize on canonical text: kWhitespace joins with single
// spaces; kCjkChar omits the space only between two CJK neighbors, so mixed
// runs keep the spaces tokenize consumed. join_tokens(tokenize(t)) is a
// fixed point of tokenize for any t.
std::string join_tokens(const std::vector<std::string>& tokens,
                        TokenizerKind kind);

std::vector<std::string> read_lines(const std::string& path);
void write_lines(const std::vector<std::string>& lines,
                 const std::string& path);

}  // namespace mtpipe
