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

#ifndef MTPIPE_AUGMENT_H_
#define MTPIPE_AUGMENT_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mtpipe/corpus.h"
#include "mtpipe/translator.h"

namespace mtpipe {

// Training-phase plan: ordered phases, each naming the dataset manifests a
// trainer should consume and how many passes to make over them.
struct Schedule {
  struct Phase {
    std::string name;
    std::vector<std::string> datasets;
    int passes = 1;

    bool operator==(const Phase&) const = default;
  };
  std::vector<Phase> phases;

  bool operator==(const Schedule&) const = default;

  nlohmann::json to_json() const;
  static Schedule from_json(const nlohmann::json& j);
  void save(const std::string& path) const;
  static Schedule load(const std::string& path);
};

// One automatic-post-editing example: a source, the base model's n-best
// translations of it, and the reference target that passed quality gating.
struct ApeRecord {
  Sentence source;
  NBestList nbest;
  Sentence reference;
  double qe_score = 0.0;

  nlohmann::json to_json() const;
  static ApeRecord from_json(const nlohmann::json& j);
};

// Appends a target->source reversed copy of every pair, keeping input order
// first. Output size is exactly 2x input.
std::vector<SentencePair> bit_reconstruct(const std::vector<SentencePair>& pairs);

// Adds a forward-model translation of every source and a backward-model
// translation of every target to the original data (1-best beam each), so
// output is 3x input before any deduplication. A translation failure skips
// that synthetic record and bumps *skipped; the original pair stays.
std::vector<SentencePair> dd_generate(const std::vector<SentencePair>& pairs,
                                      const Translator& fwd,
                                      const Translator& bwd,
                                      uint64_t* skipped = nullptr,
                                      int jobs = 1);

// Pairs a seeded uniform sample (without replacement, sample_size lines) of
// source-language monolingual text with teacher 1-best translations.
std::vector<SentencePair> ft_generate(const std::vector<Sentence>& mono_src,
                                      const Translator& teacher,
                                      size_t sample_size, uint64_t seed,
                                      int jobs = 1);

struct BtOptions {
  DecodeMode mode = DecodeMode::kBeam;
  bool tagged = false;
  std::string tag = "<BT>";
  double temperature = 1.0;
  uint64_t seed = 0;
};

// Back-translates target-language monolingual text into synthetic sources.
// When tagged, the tag is prepended as the first source token exactly once
// and provenance becomes BT_TAGGED; otherwise BT_BEAM or BT_SAMPLING per
// mode. Sampling draws are seeded per record, so results do not depend on
// how the work is sharded.
std::vector<SentencePair> bt_generate(const std::vector<Sentence>& mono_tgt,
                                      const Translator& reverse,
                                      const BtOptions& options, int jobs = 1);

// Alternation plan: each round is one phase over synthetic+authentic data
// followed by one phase over authentic data only. Manifest paths must exist.
Schedule at_schedule(const std::string& authentic_manifest,
                     const std::vector<std::string>& synthetic_manifests,
                     int rounds);

// Translates the given sources with every model (1-best beam), model-major
// order. Output size is exactly |models| x |sources| before deduplication.
std::vector<SentencePair> tel_build(
    const std::vector<Sentence>& test_sources,
    const std::vector<const Translator*>& models, int jobs = 1);

using QualityFn = std::function<double(const SentencePair&)>;

// Post-editing prompt used when no template is configured.
inline constexpr const char* kDefaultApeTemplate =
    "Source: {source}\nCandidates:\n{nbest}\nImproved translation:";

// Stand-in quality estimate from length agreement:
// clamp(1 - |ln(|src| / |tgt|)|, 0, 1); 0 when either side has no tokens.
double length_ratio_qe(const SentencePair& pair);

struct HypoOptions {
  double threshold = 0.8;  // strictly-greater gate
  int n = 10;              // beam width and n-best cap
};

// Keeps pairs whose quality estimate is strictly above the threshold and
// attaches the base model's n-best beam translations of the source; the
// original target becomes the reference.
std::vector<ApeRecord> hypo_build(const std::vector<SentencePair>& pairs,
                                  const Translator& base,
                                  const QualityFn& qe,
                                  const HypoOptions& options = {},
                                  int jobs = 1);

// Fills {source} and {nbest} in the template; the n-best block is rendered
// as "1. <hyp>" lines in rank order. Throws TemplateError if either
// placeholder is missing.
std::string ape_prompt(const ApeRecord& record, const std::string& tmpl);

// {"prompt", "completion"} pair for supervised fine-tuning; the completion
// is the reference text.
nlohmann::json ape_sft_record(const ApeRecord& record, const std::string& tmpl);

std::vector<ApeRecord> read_ape_records(const std::string& path);
void write_ape_records(const std::string& path,
                       const std::vector<ApeRecord>& records);

}  // namespace mtpipe

#endif  // MTPIPE_AUGMENT_H_
