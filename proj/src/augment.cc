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

#include "mtpipe/augment.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>

#include "mtpipe/error.h"
#include "mtpipe/hash.h"
#include "mtpipe/parallel.h"
#include "mtpipe/rng.h"

namespace mtpipe {

using nlohmann::json;

nlohmann::json Schedule::to_json() const {
  json phase_list = json::array();
  for (const auto& phase : phases) {
    phase_list.push_back(json{{"name", phase.name},
                              {"datasets", phase.datasets},
                              {"passes", phase.passes}});
  }
  return json{{"phases", phase_list}};
}

Schedule Schedule::from_json(const nlohmann::json& j) {
  Schedule schedule;
  try {
    for (const auto& entry : j.at("phases")) {
      Phase phase;
      phase.name = entry.at("name").get<std::string>();
      phase.datasets = entry.at("datasets").get<std::vector<std::string>>();
      phase.passes = entry.at("passes").get<int>();
      schedule.phases.push_back(std::move(phase));
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad schedule: ") + e.what());
  }
  return schedule;
}

void Schedule::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open file for writing: " + path);
  out << to_json().dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

Schedule Schedule::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
  return from_json(j);
}

namespace {

json sentence_to_json(const Sentence& s) {
  return json{{"text", s.text()}, {"lang", s.lang()}};
}

Sentence sentence_from_json(const json& j) {
  return Sentence(j.at("text").get<std::string>(),
                  j.at("lang").get<std::string>());
}

}  // namespace

nlohmann::json ApeRecord::to_json() const {
  json hyps = json::array();
  for (const auto& hyp : nbest.hypotheses) {
    hyps.push_back(json{
        {"text", hyp.text}, {"logprob", hyp.logprob}, {"rank", hyp.rank}});
  }
  return json{{"source", sentence_to_json(source)},
              {"nbest", hyps},
              {"reference", sentence_to_json(reference)},
              {"qe_score", qe_score}};
}

ApeRecord ApeRecord::from_json(const nlohmann::json& j) {
  ApeRecord record;
  try {
    record.source = sentence_from_json(j.at("source"));
    record.reference = sentence_from_json(j.at("reference"));
    record.qe_score = j.at("qe_score").get<double>();
    record.nbest.source = record.source;
    for (const auto& entry : j.at("nbest")) {
      record.nbest.hypotheses.push_back({entry.at("text").get<std::string>(),
                                         entry.at("logprob").get<double>(),
                                         entry.at("rank").get<int>()});
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad ape record: ") + e.what());
  }
  return record;
}

std::vector<SentencePair> bit_reconstruct(
    const std::vector<SentencePair>& pairs) {
  std::vector<SentencePair> out;
  out.reserve(pairs.size() * 2);
  out = pairs;
  for (const auto& pair : pairs) {
    SentencePair reversed;
    reversed.src = pair.tgt;
    reversed.tgt = pair.src;
    reversed.provenance = Provenance::kBitReversed;
    out.push_back(std::move(reversed));
  }
  return out;
}

namespace {

// 1-best deterministic decode used by the synthesis strategies.
Sentence one_best(const Translator& model, const Sentence& source) {
  DecodeSpec spec;
  spec.mode = DecodeMode::kBeam;
  spec.width = 1;
  NBestList nbest = model.translate(source, spec, 1);
  if (nbest.hypotheses.empty()) {
    throw ScoreError("translator returned no hypotheses");
  }
  return Sentence(nbest.hypotheses[0].text, model.output_lang());
}

}  // namespace

std::vector<SentencePair> dd_generate(const std::vector<SentencePair>& pairs,
                                      const Translator& fwd,
                                      const Translator& bwd,
                                      uint64_t* skipped, int jobs) {
  std::atomic<uint64_t> skip_count{0};
  std::vector<std::optional<SentencePair>> fwd_slots(pairs.size());
  std::vector<std::optional<SentencePair>> bwd_slots(pairs.size());
  parallel_for(pairs.size(), jobs, [&](size_t i) {
    try {
      SentencePair synth;
      synth.src = pairs[i].src;
      synth.tgt = one_best(fwd, pairs[i].src);
      synth.provenance = Provenance::kDdFwd;
      fwd_slots[i] = std::move(synth);
    } catch (const Error&) {
      ++skip_count;
    }
    try {
      SentencePair synth;
      synth.src = one_best(bwd, pairs[i].tgt);
      synth.tgt = pairs[i].tgt;
      synth.provenance = Provenance::kDdBwd;
      bwd_slots[i] = std::move(synth);
    } catch (const Error&) {
      ++skip_count;
    }
  });
  std::vector<SentencePair> out;
  out.reserve(pairs.size() * 3);
  out = pairs;
  for (auto& slot : fwd_slots) {
    if (slot) out.push_back(std::move(*slot));
  }
  for (auto& slot : bwd_slots) {
    if (slot) out.push_back(std::move(*slot));
  }
  if (skipped != nullptr) *skipped = skip_count.load();
  return out;
}

std::vector<SentencePair> ft_generate(const std::vector<Sentence>& mono_src,
                                      const Translator& teacher,
                                      size_t sample_size, uint64_t seed,
                                      int jobs) {
  if (sample_size > mono_src.size()) {
    throw ConfigError("ft: sample_size " + std::to_string(sample_size) +
                      " exceeds corpus size " +
                      std::to_string(mono_src.size()));
  }
  Rng rng(seed);
  std::vector<size_t> picks =
      sample_without_replacement(mono_src.size(), sample_size, rng);
  std::vector<SentencePair> out(picks.size());
  parallel_for(picks.size(), jobs, [&](size_t i) {
    out[i].src = mono_src[picks[i]];
    out[i].tgt = one_best(teacher, mono_src[picks[i]]);
    out[i].provenance = Provenance::kFt;
  });
  return out;
}

std::vector<SentencePair> bt_generate(const std::vector<Sentence>& mono_tgt,
                                      const Translator& reverse,
                                      const BtOptions& options, int jobs) {
  if (options.tagged && options.tag.empty()) {
    throw ConfigError("bt: tagged output needs a non-empty tag");
  }
  Provenance provenance =
      options.tagged ? Provenance::kBtTagged
                     : (options.mode == DecodeMode::kBeam
                            ? Provenance::kBtBeam
                            : Provenance::kBtSampling);
  std::vector<SentencePair> out(mono_tgt.size());
  parallel_for(mono_tgt.size(), jobs, [&](size_t i) {
    DecodeSpec spec;
    spec.mode = options.mode;
    spec.width = 1;
    spec.temperature = options.temperature;
    spec.seed = derive_seed(options.seed, i);  // per-record, shard-stable
    NBestList nbest = reverse.translate(mono_tgt[i], spec, 1);
    if (nbest.hypotheses.empty()) {
      throw ScoreError("translator returned no hypotheses");
    }
    std::string text = nbest.hypotheses[0].text;
    if (options.tagged) {
      text = text.empty() ? options.tag : options.tag + " " + text;
    }
    out[i].src = Sentence(text, reverse.output_lang());
    out[i].tgt = mono_tgt[i];
    out[i].provenance = provenance;
  });
  return out;
}

Schedule at_schedule(const std::string& authentic_manifest,
                     const std::vector<std::string>& synthetic_manifests,
                     int rounds) {
  if (rounds < 1) throw ConfigError("schedule: rounds must be >= 1");
  if (!std::filesystem::exists(authentic_manifest)) {
    throw ConfigError("schedule: missing manifest: " + authentic_manifest);
  }
  for (const auto& path : synthetic_manifests) {
    if (!std::filesystem::exists(path)) {
      throw ConfigError("schedule: missing manifest: " + path);
    }
  }

  std::vector<std::string> mixed = synthetic_manifests;
  if (std::find(mixed.begin(), mixed.end(), authentic_manifest) ==
      mixed.end()) {
    mixed.push_back(authentic_manifest);
  }

  Schedule schedule;
  for (int round = 1; round <= rounds; ++round) {
    schedule.phases.push_back(
        {"round" + std::to_string(round) + "_mixed", mixed, 1});
    schedule.phases.push_back({"round" + std::to_string(round) + "_authentic",
                               {authentic_manifest},
                               1});
  }
  return schedule;
}

std::vector<SentencePair> tel_build(
    const std::vector<Sentence>& test_sources,
    const std::vector<const Translator*>& models, int jobs) {
  if (models.empty()) throw ConfigError("tel: at least one model required");
  for (const auto* model : models) {
    if (model == nullptr) throw ConfigError("tel: null model");
  }
  size_t per_model = test_sources.size();
  std::vector<SentencePair> out(models.size() * per_model);
  parallel_for(out.size(), jobs, [&](size_t i) {
    const Translator& model = *models[i / per_model];
    const Sentence& source = test_sources[i % per_model];
    out[i].src = source;
    out[i].tgt = one_best(model, source);
    out[i].provenance = Provenance::kTel;
  });
  return out;
}

double length_ratio_qe(const SentencePair& pair) {
  double s = static_cast<double>(pair.src.token_count());
  double t = static_cast<double>(pair.tgt.token_count());
  if (s == 0.0 || t == 0.0) return 0.0;
  double v = 1.0 - std::abs(std::log(s / t));
  return std::clamp(v, 0.0, 1.0);
}

std::vector<ApeRecord> hypo_build(const std::vector<SentencePair>& pairs,
                                  const Translator& base, const QualityFn& qe,
                                  const HypoOptions& options, int jobs) {
  if (options.n < 1) throw ConfigError("hypo: n must be >= 1");
  std::vector<std::optional<ApeRecord>> slots(pairs.size());
  parallel_for(pairs.size(), jobs, [&](size_t i) {
    double score = qe(pairs[i]);
    if (!(score > options.threshold)) return;  // strictly-greater gate
    DecodeSpec spec;
    spec.mode = DecodeMode::kBeam;
    spec.width = options.n;
    ApeRecord record;
    record.source = pairs[i].src;
    record.nbest = base.translate(pairs[i].src, spec, options.n);
    record.reference = pairs[i].tgt;
    record.qe_score = score;
    slots[i] = std::move(record);
  });
  std::vector<ApeRecord> out;
  for (auto& slot : slots) {
    if (slot) out.push_back(std::move(*slot));
  }
  return out;
}

namespace {

size_t replace_all(std::string* text, const std::string& needle,
                   const std::string& replacement) {
  size_t count = 0;
  size_t pos = 0;
  while ((pos = text->find(needle, pos)) != std::string::npos) {
    text->replace(pos, needle.size(), replacement);
    pos += replacement.size();
    ++count;
  }
  return count;
}

}  // namespace

std::string ape_prompt(const ApeRecord& record, const std::string& tmpl) {
  if (tmpl.find("{source}") == std::string::npos) {
    throw TemplateError("template is missing the {source} placeholder");
  }
  if (tmpl.find("{nbest}") == std::string::npos) {
    throw TemplateError("template is missing the {nbest} placeholder");
  }
  std::string nbest_block;
  for (size_t i = 0; i < record.nbest.hypotheses.size(); ++i) {
    if (i) nbest_block.push_back('\n');
    nbest_block +=
        std::to_string(i + 1) + ". " + record.nbest.hypotheses[i].text;
  }
  std::string prompt = tmpl;
  replace_all(&prompt, "{source}", record.source.text());
  replace_all(&prompt, "{nbest}", nbest_block);
  return prompt;
}

nlohmann::json ape_sft_record(const ApeRecord& record,
                              const std::string& tmpl) {
  return json{{"prompt", ape_prompt(record, tmpl)},
              {"completion", record.reference.text()}};
}

std::vector<ApeRecord> read_ape_records(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  std::vector<ApeRecord> records;
  std::string line;
  uint64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    try {
      records.push_back(ApeRecord::from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw FormatError(path + ":" + std::to_string(lineno) + ": " +
                        e.what());
    }
  }
  return records;
}

void write_ape_records(const std::string& path,
                       const std::vector<ApeRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open file for writing: " + path);
  for (const auto& record : records) {
    out << record.to_json().dump() << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace mtpipe
