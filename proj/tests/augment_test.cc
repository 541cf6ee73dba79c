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

#include <cmath>
#include <random>
#include <set>
#include <string>

#include <doctest.h>

#include "mtpipe/error.h"
#include "test_util.h"

using namespace mtpipe;

namespace {

// Uppercases every token; optionally fails on a marker token to test skip
// accounting.
class UpperTranslator : public Translator {
 public:
  explicit UpperTranslator(std::string lang, std::string fail_on = "")
      : lang_(std::move(lang)), fail_on_(std::move(fail_on)) {}

  NBestList translate(const Sentence& source, const DecodeSpec& spec,
                      int n) const override {
    spec.validate();
    if (!fail_on_.empty() &&
        source.text().find(fail_on_) != std::string::npos) {
      throw ScoreError("refusing to translate: " + fail_on_);
    }
    std::string out;
    for (char c : source.text()) {
      out.push_back(c >= 'a' && c <= 'z' ? static_cast<char>(c - 32) : c);
    }
    NBestList result;
    result.source = source;
    result.hypotheses.push_back({out, -1.0, 1});
    if (n > 1) {
      result.hypotheses.push_back({out + " ALT", -2.0, 2});
    }
    return result;
  }

  std::string output_lang() const override { return lang_; }

 private:
  std::string lang_;
  std::string fail_on_;
};

std::vector<SentencePair> sample_pairs(int count) {
  std::vector<SentencePair> pairs;
  for (int i = 0; i < count; ++i) {
    pairs.push_back(testutil::make_pair("src " + std::to_string(i),
                                        "tgt " + std::to_string(i),
                                        Provenance::kAuthentic, "en", "de"));
  }
  return pairs;
}

std::vector<Sentence> sample_mono(int count, const std::string& lang) {
  std::vector<Sentence> mono;
  for (int i = 0; i < count; ++i) {
    mono.push_back(Sentence("line " + std::to_string(i), lang));
  }
  return mono;
}

}  // namespace

// ---------------------------------------------------------------------------
// Reversed-pair reconstruction

TEST_CASE("bit doubles the corpus with reversed copies") {
  auto pairs = sample_pairs(5);
  auto out = bit_reconstruct(pairs);
  REQUIRE(out.size() == 10);
  for (int i = 0; i < 5; ++i) {
    CHECK(out[i].src.text() == pairs[i].src.text());
    CHECK(out[i].provenance == Provenance::kAuthentic);
    const auto& reversed = out[5 + i];
    CHECK(reversed.src.text() == pairs[i].tgt.text());
    CHECK(reversed.tgt.text() == pairs[i].src.text());
    CHECK(reversed.src.lang() == "de");
    CHECK(reversed.tgt.lang() == "en");
    CHECK(reversed.provenance == Provenance::kBitReversed);
  }
}

TEST_CASE("bit size law holds across corpus sizes") {
  for (int n : {1, 2, 17, 100}) {
    CHECK(bit_reconstruct(sample_pairs(n)).size() == 2 * n);
  }
  CHECK(bit_reconstruct({}).empty());
}

// ---------------------------------------------------------------------------
// Dual-direction synthesis

TEST_CASE("dd triples the corpus") {
  auto pairs = sample_pairs(4);
  UpperTranslator fwd("de"), bwd("en");
  uint64_t skipped = 0;
  auto out = dd_generate(pairs, fwd, bwd, &skipped);
  REQUIRE(out.size() == 12);
  CHECK(skipped == 0);
  // Originals first, then forward synthetics, then backward synthetics.
  CHECK(out[0].provenance == Provenance::kAuthentic);
  CHECK(out[4].provenance == Provenance::kDdFwd);
  CHECK(out[8].provenance == Provenance::kDdBwd);
  // Forward: source kept, target replaced by the model output.
  CHECK(out[4].src.text() == "src 0");
  CHECK(out[4].tgt.text() == "SRC 0");
  CHECK(out[4].tgt.lang() == "de");
  // Backward: target kept, source replaced by the model output.
  CHECK(out[8].src.text() == "TGT 0");
  CHECK(out[8].src.lang() == "en");
  CHECK(out[8].tgt.text() == "tgt 0");
}

TEST_CASE("dd size law holds across corpus sizes") {
  UpperTranslator fwd("de"), bwd("en");
  for (int n : {1, 3, 50}) {
    CHECK(dd_generate(sample_pairs(n), fwd, bwd).size() == 3u * n);
  }
}

TEST_CASE("dd skips failed translations and keeps originals") {
  auto pairs = sample_pairs(3);
  UpperTranslator fwd("de", "src 1"), bwd("en", "tgt 2");
  uint64_t skipped = 0;
  auto out = dd_generate(pairs, fwd, bwd, &skipped);
  CHECK(skipped == 2);
  CHECK(out.size() == 7);  // 3 originals + 2 forward + 2 backward
  for (const auto& pair : out) {
    if (pair.provenance == Provenance::kDdFwd) {
      CHECK(pair.src.text() != "src 1");
    }
    if (pair.provenance == Provenance::kDdBwd) {
      CHECK(pair.tgt.text() != "tgt 2");
    }
  }
}

TEST_CASE("dd output does not depend on the job count") {
  auto pairs = sample_pairs(20);
  UpperTranslator fwd("de"), bwd("en");
  auto one = dd_generate(pairs, fwd, bwd, nullptr, 1);
  auto eight = dd_generate(pairs, fwd, bwd, nullptr, 8);
  REQUIRE(one.size() == eight.size());
  for (size_t i = 0; i < one.size(); ++i) {
    CHECK(one[i].src.text() == eight[i].src.text());
    CHECK(one[i].tgt.text() == eight[i].tgt.text());
    CHECK(one[i].provenance == eight[i].provenance);
  }
}

// ---------------------------------------------------------------------------
// Forward-translation of sampled monolingual text

TEST_CASE("ft pairs sampled lines with teacher translations") {
  auto mono = sample_mono(10, "en");
  UpperTranslator teacher("de");
  auto out = ft_generate(mono, teacher, 4, 99);
  REQUIRE(out.size() == 4);
  std::set<std::string> seen;
  for (const auto& pair : out) {
    CHECK(pair.provenance == Provenance::kFt);
    CHECK(pair.src.lang() == "en");
    CHECK(pair.tgt.lang() == "de");
    std::string upper;
    for (char c : pair.src.text()) {
      upper.push_back(c >= 'a' && c <= 'z' ? static_cast<char>(c - 32) : c);
    }
    CHECK(pair.tgt.text() == upper);
    // Sampling is without replacement.
    CHECK(seen.insert(pair.src.text()).second);
  }
}

TEST_CASE("ft sampling is seeded and stable across job counts") {
  auto mono = sample_mono(30, "en");
  UpperTranslator teacher("de");
  auto a = ft_generate(mono, teacher, 10, 7, 1);
  auto b = ft_generate(mono, teacher, 10, 7, 8);
  auto c = ft_generate(mono, teacher, 10, 8, 1);
  REQUIRE(a.size() == b.size());
  bool same_as_b = true, same_as_c = true;
  for (size_t i = 0; i < a.size(); ++i) {
    same_as_b &= a[i].src.text() == b[i].src.text();
    if (i < c.size()) same_as_c &= a[i].src.text() == c[i].src.text();
  }
  CHECK(same_as_b);
  CHECK_FALSE(same_as_c);  // a different seed picks a different sample
}

TEST_CASE("ft rejects oversized samples") {
  auto mono = sample_mono(3, "en");
  UpperTranslator teacher("de");
  CHECK_THROWS_AS(ft_generate(mono, teacher, 4, 0), ConfigError);
  CHECK(ft_generate(mono, teacher, 3, 0).size() == 3);
}

// ---------------------------------------------------------------------------
// Back-translation

TEST_CASE("bt pairs synthetic sources with the original targets") {
  auto mono = sample_mono(5, "de");
  UpperTranslator reverse("en");
  BtOptions options;
  auto out = bt_generate(mono, reverse, options);
  REQUIRE(out.size() == 5);
  for (int i = 0; i < 5; ++i) {
    CHECK(out[i].tgt.text() == mono[i].text());
    CHECK(out[i].src.text() == "LINE " + std::to_string(i));
    CHECK(out[i].src.lang() == "en");
    CHECK(out[i].provenance == Provenance::kBtBeam);
  }
}

TEST_CASE("bt tagging prepends the tag once and switches provenance") {
  auto mono = sample_mono(2, "de");
  UpperTranslator reverse("en");
  BtOptions options;
  options.tagged = true;
  auto out = bt_generate(mono, reverse, options);
  REQUIRE(out.size() == 2);
  CHECK(out[0].src.text() == "<BT> LINE 0");
  CHECK(out[0].src.tokens()[0] == "<BT>");
  CHECK(out[0].provenance == Provenance::kBtTagged);
  // A custom tag is honored.
  options.tag = "<SYN>";
  auto custom = bt_generate(mono, reverse, options);
  CHECK(custom[0].src.text() == "<SYN> LINE 0");
}

TEST_CASE("bt sampling mode sets provenance and stays seed-stable") {
  auto mono = sample_mono(6, "de");
  Lexicon lexicon;
  lexicon["line"] = {{"zeile", 0.5}, {"reihe", 0.5}};
  DictTranslator reverse(lexicon, "en");
  BtOptions options;
  options.mode = DecodeMode::kSampling;
  options.seed = 11;
  auto a = bt_generate(mono, reverse, options, 1);
  auto b = bt_generate(mono, reverse, options, 4);
  REQUIRE(a.size() == 6);
  REQUIRE(b.size() == 6);
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].provenance == Provenance::kBtSampling);
    CHECK(a[i].src.text() == b[i].src.text());
  }
}

// ---------------------------------------------------------------------------
// Alternation schedule

TEST_CASE("at schedule alternates mixed and authentic phases") {
  testutil::TempDir dir;
  testutil::write_file(dir.file("auth.jsonl"), "{}\n");
  testutil::write_file(dir.file("synth.jsonl"), "{}\n");
  auto schedule = at_schedule(dir.file("auth.jsonl"),
                              {dir.file("synth.jsonl")}, 2);
  REQUIRE(schedule.phases.size() == 4);
  CHECK(schedule.phases[0].datasets ==
        std::vector<std::string>{dir.file("synth.jsonl"),
                                 dir.file("auth.jsonl")});
  CHECK(schedule.phases[1].datasets ==
        std::vector<std::string>{dir.file("auth.jsonl")});
  CHECK(schedule.phases[2].datasets == schedule.phases[0].datasets);
  CHECK(schedule.phases[3].datasets == schedule.phases[1].datasets);
  for (const auto& phase : schedule.phases) CHECK(phase.passes == 1);
}

TEST_CASE("at schedule validates inputs") {
  testutil::TempDir dir;
  testutil::write_file(dir.file("auth.jsonl"), "{}\n");
  CHECK_THROWS_AS(at_schedule(dir.file("missing.jsonl"), {}, 1), ConfigError);
  CHECK_THROWS_AS(at_schedule(dir.file("auth.jsonl"),
                              {dir.file("missing.jsonl")}, 1),
                  ConfigError);
  CHECK_THROWS_AS(at_schedule(dir.file("auth.jsonl"), {}, 0), ConfigError);
}

TEST_CASE("schedule json round-trips") {
  Schedule schedule;
  schedule.phases.push_back({"warmup", {"a.jsonl", "b.jsonl"}, 2});
  schedule.phases.push_back({"anneal", {"c.jsonl"}, 1});
  auto j = schedule.to_json();
  CHECK(Schedule::from_json(j) == schedule);

  testutil::TempDir dir;
  schedule.save(dir.file("schedule.json"));
  CHECK(Schedule::load(dir.file("schedule.json")) == schedule);
}

// ---------------------------------------------------------------------------
// Ensemble translations of a test set

TEST_CASE("tel emits model-major translations of every source") {
  auto sources = sample_mono(3, "en");
  UpperTranslator m1("de");
  UpperTranslator m2("de");
  auto out = tel_build(sources, {&m1, &m2});
  REQUIRE(out.size() == 6);
  for (int m = 0; m < 2; ++m) {
    for (int i = 0; i < 3; ++i) {
      const auto& pair = out[m * 3 + i];
      CHECK(pair.src.text() == sources[i].text());
      CHECK(pair.tgt.text() == "LINE " + std::to_string(i));
      CHECK(pair.provenance == Provenance::kTel);
    }
  }
}

TEST_CASE("tel size law holds for model and source counts") {
  UpperTranslator m1("de"), m2("de"), m3("de");
  std::vector<const Translator*> models{&m1, &m2, &m3};
  for (int n : {1, 4, 25}) {
    CHECK(tel_build(sample_mono(n, "en"), models).size() == 3u * n);
  }
  CHECK_THROWS_AS(tel_build(sample_mono(2, "en"), {}), ConfigError);
}

// ---------------------------------------------------------------------------
// Quality-gated post-editing data

TEST_CASE("length ratio qe is 1 for balanced pairs and decays") {
  CHECK(length_ratio_qe(testutil::make_pair("a b c", "x y z")) ==
        doctest::Approx(1.0));
  auto unbalanced = testutil::make_pair("a b c d", "x");
  CHECK(length_ratio_qe(unbalanced) ==
        doctest::Approx(std::max(0.0, 1.0 - std::log(4.0))).epsilon(1e-9));
  CHECK(length_ratio_qe(testutil::make_pair("", "x")) == 0.0);
  CHECK(length_ratio_qe(testutil::make_pair("a", "")) == 0.0);
}

TEST_CASE("hypo keeps only strictly-above-threshold pairs") {
  auto pairs = sample_pairs(3);
  UpperTranslator base("de");
  std::map<std::string, double> scores{{"src 0", 0.80},
                                       {"src 1", 0.801},
                                       {"src 2", 0.95}};
  auto qe = [&scores](const SentencePair& pair) {
    return scores.at(pair.src.text());
  };
  auto records = hypo_build(pairs, base, qe);
  REQUIRE(records.size() == 2);
  CHECK(records[0].source.text() == "src 1");
  CHECK(records[0].qe_score == doctest::Approx(0.801));
  CHECK(records[1].source.text() == "src 2");
  // The original target is the reference.
  CHECK(records[0].reference.text() == "tgt 1");
}

TEST_CASE("hypo attaches at most n hypotheses in rank order") {
  Lexicon lexicon;
  lexicon["w"] = {{"a", 0.3}, {"b", 0.25}, {"c", 0.2},
                  {"d", 0.15}, {"e", 0.1}};
  DictTranslator base(lexicon, "de");
  std::vector<SentencePair> pairs{
      testutil::make_pair("w w w w", "x y z w", Provenance::kAuthentic,
                          "en", "de")};
  auto qe = [](const SentencePair&) { return 0.9; };
  HypoOptions options;
  options.n = 10;
  auto records = hypo_build(pairs, base, qe, options);
  REQUIRE(records.size() == 1);
  CHECK(records[0].nbest.hypotheses.size() == 10);  // 625 candidates capped
  for (size_t i = 0; i < records[0].nbest.hypotheses.size(); ++i) {
    CHECK(records[0].nbest.hypotheses[i].rank == static_cast<int>(i + 1));
    if (i > 0) {
      CHECK(records[0].nbest.hypotheses[i].logprob <=
            records[0].nbest.hypotheses[i - 1].logprob);
    }
  }

  HypoOptions narrow;
  narrow.n = 3;
  auto few = hypo_build(pairs, base, qe, narrow);
  CHECK(few[0].nbest.hypotheses.size() == 3);
}

TEST_CASE("hypo output is stable across job counts") {
  auto pairs = sample_pairs(12);
  UpperTranslator base("de");
  auto qe = [](const SentencePair&) { return 0.9; };
  auto one = hypo_build(pairs, base, qe, {}, 1);
  auto eight = hypo_build(pairs, base, qe, {}, 8);
  REQUIRE(one.size() == eight.size());
  for (size_t i = 0; i < one.size(); ++i) {
    CHECK(one[i].source.text() == eight[i].source.text());
    CHECK(one[i].nbest.hypotheses.size() == eight[i].nbest.hypotheses.size());
  }
}

TEST_CASE("ape prompt fills both placeholders") {
  ApeRecord record;
  record.source = Sentence("hello", "en");
  record.reference = Sentence("hallo", "de");
  record.nbest.hypotheses.push_back({"hallo welt", -0.5, 1});
  record.nbest.hypotheses.push_back({"welt hallo", -1.0, 2});
  auto prompt = ape_prompt(record, kDefaultApeTemplate);
  CHECK(prompt ==
        "Source: hello\nCandidates:\n1. hallo welt\n2. welt hallo\n"
        "Improved translation:");
  CHECK_THROWS_AS(ape_prompt(record, "no placeholders"), TemplateError);
  CHECK_THROWS_AS(ape_prompt(record, "{source} only"), TemplateError);
}

TEST_CASE("ape sft record pairs prompt with the reference") {
  ApeRecord record;
  record.source = Sentence("hello", "en");
  record.reference = Sentence("hallo", "de");
  record.nbest.hypotheses.push_back({"hallo welt", -0.5, 1});
  auto j = ape_sft_record(record, kDefaultApeTemplate);
  CHECK(j["prompt"] == ape_prompt(record, kDefaultApeTemplate));
  CHECK(j["completion"] == "hallo");
}

TEST_CASE("ape records round-trip through jsonl") {
  testutil::TempDir dir;
  auto pairs = sample_pairs(3);
  UpperTranslator base("de");
  auto qe = [](const SentencePair&) { return 0.9; };
  auto records = hypo_build(pairs, base, qe);
  write_ape_records(dir.file("ape.jsonl"), records);
  auto loaded = read_ape_records(dir.file("ape.jsonl"));
  REQUIRE(loaded.size() == records.size());
  for (size_t i = 0; i < records.size(); ++i) {
    CHECK(loaded[i].source.text() == records[i].source.text());
    CHECK(loaded[i].reference.text() == records[i].reference.text());
    CHECK(loaded[i].qe_score == doctest::Approx(records[i].qe_score));
    REQUIRE(loaded[i].nbest.hypotheses.size() ==
            records[i].nbest.hypotheses.size());
    for (size_t h = 0; h < records[i].nbest.hypotheses.size(); ++h) {
      CHECK(loaded[i].nbest.hypotheses[h].text ==
            records[i].nbest.hypotheses[h].text);
      CHECK(loaded[i].nbest.hypotheses[h].logprob ==
            doctest::Approx(records[i].nbest.hypotheses[h].logprob));
    }
  }
}
