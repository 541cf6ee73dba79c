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

#include "mtpipe/pipeline.h"

#include <algorithm>
#include <cstdlib>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>
#include <json.hpp>

#include "mtpipe/augment.h"
#include "mtpipe/corpus.h"
#include "mtpipe/curriculum.h"
#include "mtpipe/error.h"
#include "mtpipe/hash.h"
#include "test_util.h"

using namespace mtpipe;
using nlohmann::json;

namespace {

void write_bitext(const std::string& path, int count,
                  const std::string& tgt_lang = "de") {
  std::vector<SentencePair> pairs;
  for (int i = 0; i < count; ++i) {
    pairs.push_back(testutil::make_pair(
        "alpha beta " + std::to_string(i), "eins zwei " + std::to_string(i),
        Provenance::kAuthentic, "en", tgt_lang));
  }
  write_all_records(pairs, path, RecordFormat::kJsonl);
}

std::string run_and_slurp(const std::string& config_path,
                          const std::string& output_path,
                          int jobs_override = 0) {
  run_pipeline(config_path, jobs_override);
  return testutil::read_file(output_path);
}

}  // namespace

TEST_CASE("file digest matches an in-memory hash of the bytes") {
  testutil::TempDir dir;
  testutil::write_file(dir.file("data.bin"), "some bytes\nmore bytes\n");
  Fnv128 hash;
  hash.update("some bytes\nmore bytes\n");
  CHECK(file_digest_hex(dir.file("data.bin")) == to_hex(hash.digest()));
  CHECK_THROWS_AS(file_digest_hex(dir.file("absent")), IoError);
}

TEST_CASE("config paths fall back to the config directory") {
  testutil::TempDir dir;
  testutil::write_file(dir.file("present.json"), "{}");
  CHECK(resolve_config_path(dir.file("present.json")) ==
        dir.file("present.json"));

  testutil::write_file(dir.file("fallback.json"), "{}");
  setenv(kConfigDirEnv, dir.path().c_str(), 1);
  CHECK(resolve_config_path("fallback.json") == dir.file("fallback.json"));
  CHECK_THROWS_AS(resolve_config_path("never-exists.json"), IoError);
  unsetenv(kConfigDirEnv);
  CHECK_THROWS_AS(resolve_config_path("fallback.json"), IoError);
}

TEST_CASE("manifest serialization omits unknown record counts") {
  Manifest manifest;
  manifest.seed = 9;
  manifest.jobs = 2;
  manifest.config_digest = "ff";
  Manifest::Stage stage;
  stage.name = "s";
  stage.op = "dedup";
  stage.params = json{{"in", "a"}};
  stage.inputs.push_back({"a", "00", -1});
  stage.outputs.push_back({"b", "11", 42});
  stage.details = json{{"kept", 42}};
  manifest.stages.push_back(stage);

  auto j = manifest.to_json();
  CHECK(j["version"] == kToolkitVersion);
  CHECK(j["seed"] == 9);
  CHECK(j["jobs"] == 2);
  REQUIRE(j["stages"].size() == 1);
  CHECK_FALSE(j["stages"][0]["inputs"][0].contains("records"));
  CHECK(j["stages"][0]["outputs"][0]["records"] == 42);
}

TEST_CASE("default filter chain has the documented steps in order") {
  auto config = default_filter_config();
  std::vector<std::string> names;
  for (const auto& entry : config) names.push_back(entry.at("name"));
  CHECK(names == std::vector<std::string>{"dedup", "strip_invisible",
                                          "normalize_width", "normalize_punct",
                                          "max_tokens", "ratio"});
}

TEST_CASE("cleanup pipeline runs end to end") {
  testutil::TempDir dir;
  std::vector<SentencePair> raw;
  raw.push_back(testutil::make_pair("alpha beta", "eins zwei",
                                    Provenance::kAuthentic, "en", "de"));
  raw.push_back(testutil::make_pair("alpha beta", "eins zwei",
                                    Provenance::kAuthentic, "en", "de"));
  raw.push_back(testutil::make_pair("gamma delta", "drei vier",
                                    Provenance::kAuthentic, "en", "de"));
  raw.push_back(testutil::make_pair("epsilon", "fuenf",
                                    Provenance::kAuthentic, "en", "de"));
  write_all_records(raw, dir.file("raw.jsonl"), RecordFormat::kJsonl);

  json config{
      {"seed", 7},
      {"jobs", 2},
      {"src_lang", "en"},
      {"tgt_lang", "de"},
      {"manifest", "manifest.json"},
      {"stages",
       json::array(
           {json{{"name", "clean"},
                 {"op", "preprocess"},
                 {"in", "raw.jsonl"},
                 {"out", "clean.jsonl"}},
            json{{"name", "double"},
                 {"op", "bit"},
                 {"in", "clean.jsonl"},
                 {"out", "doubled.jsonl"}},
            json{{"name", "subword"},
                 {"op", "bpe_learn"},
                 {"in", "doubled.jsonl"},
                 {"merges", 20},
                 {"model", "bpe.model"}},
            json{{"name", "encode"},
                 {"op", "bpe_apply"},
                 {"model", "bpe.model"},
                 {"in", "doubled.jsonl"},
                 {"out_src", "train.src"},
                 {"out_tgt", "train.tgt"}},
            json{{"name", "describe"},
                 {"op", "stats"},
                 {"in", "doubled.jsonl"},
                 {"out", "stats.json"}}})}};
  testutil::write_file(dir.file("pipeline.json"), config.dump(2));

  Manifest manifest = run_pipeline(dir.file("pipeline.json"));
  REQUIRE(manifest.stages.size() == 5);
  CHECK(manifest.seed == 7);
  CHECK(manifest.jobs == 2);
  CHECK(manifest.config_digest == file_digest_hex(dir.file("pipeline.json")));

  // The duplicate is gone; reversal doubles the survivors.
  CHECK(manifest.stages[0].details["output_count"] == 3);
  auto doubled = read_all_records(dir.file("doubled.jsonl"),
                                  RecordFormat::kJsonl, {});
  CHECK(doubled.size() == 6);
  CHECK(manifest.stages[1].details["output"] == 6);

  // Subword model and encoded streams line up with the corpus.
  CHECK(manifest.stages[2].details["merges"] == 20);
  auto src_lines = testutil::read_file(dir.file("train.src"));
  CHECK(std::count(src_lines.begin(), src_lines.end(), '\n') == 6);

  // Stats stage recorded the doubled corpus.
  auto stats = json::parse(testutil::read_file(dir.file("stats.json")));
  CHECK(stats["pair_count"] == 6);

  // The manifest was written where the config asked.
  auto saved = json::parse(testutil::read_file(dir.file("manifest.json")));
  CHECK(saved["stages"].size() == 5);
  CHECK(saved == manifest.to_json());

  // Every stage records digested inputs and outputs.
  for (const auto& stage : manifest.stages) {
    CHECK_FALSE(stage.inputs.empty());
    CHECK_FALSE(stage.outputs.empty());
    for (const auto& file : stage.inputs) CHECK(file.digest.size() == 32);
    for (const auto& file : stage.outputs) CHECK(file.digest.size() == 32);
  }
}

TEST_CASE("synthesis pipeline covers the augmentation ops") {
  testutil::TempDir dir;
  write_bitext(dir.file("bitext.jsonl"), 4);
  testutil::write_file(dir.file("mono_src.txt"),
                       "alpha beta\nbeta alpha\nalpha alpha\n");
  testutil::write_file(dir.file("mono_tgt.txt"), "eins zwei\nzwei eins\n");
  testutil::write_file(dir.file("fwd.tsv"),
                       "alpha\teins\t1.0\nbeta\tzwei\t1.0\n");
  testutil::write_file(dir.file("fwd2.tsv"),
                       "alpha\tuno\t1.0\nbeta\tdue\t1.0\n");
  testutil::write_file(dir.file("bwd.tsv"),
                       "eins\talpha\t1.0\nzwei\tbeta\t1.0\n");

  json config{
      {"seed", 11},
      {"src_lang", "en"},
      {"tgt_lang", "de"},
      {"stages",
       json::array(
           {json{{"name", "round_trip"},
                 {"op", "dd"},
                 {"in", "bitext.jsonl"},
                 {"out", "dd.jsonl"},
                 {"fwd_lexicon", "fwd.tsv"},
                 {"bwd_lexicon", "bwd.tsv"}},
            json{{"name", "teach"},
                 {"op", "ft"},
                 {"mono", "mono_src.txt"},
                 {"lexicon", "fwd.tsv"},
                 {"out", "ft.jsonl"},
                 {"sample_size", 2}},
            json{{"name", "reverse"},
                 {"op", "bt"},
                 {"mono", "mono_tgt.txt"},
                 {"lexicon", "bwd.tsv"},
                 {"out", "bt.jsonl"},
                 {"tagged", true}},
            json{{"name", "ensemble"},
                 {"op", "tel"},
                 {"mono", "mono_src.txt"},
                 {"lexicons", json::array({"fwd.tsv", "fwd2.tsv"})},
                 {"out", "tel.jsonl"}},
            json{{"name", "pool"},
                 {"op", "merge"},
                 {"inputs", json::array({"dd.jsonl", "ft.jsonl", "bt.jsonl"})},
                 {"out", "pool.jsonl"},
                 {"dedup", true}},
            json{{"name", "gate"},
                 {"op", "hypo"},
                 {"in", "bitext.jsonl"},
                 {"lexicon", "fwd.tsv"},
                 {"out", "ape.jsonl"},
                 {"sft_out", "sft.jsonl"},
                 {"threshold", 0.5}},
            json{{"name", "plan"},
                 {"op", "at_schedule"},
                 {"authentic", "bitext.jsonl"},
                 {"synthetic", json::array({"pool.jsonl"})},
                 {"rounds", 2},
                 {"out", "schedule.json"}}})}};
  testutil::write_file(dir.file("pipeline.json"), config.dump(2));

  Manifest manifest = run_pipeline(dir.file("pipeline.json"));
  REQUIRE(manifest.stages.size() == 7);

  auto dd = read_all_records(dir.file("dd.jsonl"), RecordFormat::kJsonl, {});
  CHECK(dd.size() == 12);

  auto ft = read_all_records(dir.file("ft.jsonl"), RecordFormat::kJsonl, {});
  REQUIRE(ft.size() == 2);
  for (const auto& pair : ft) CHECK(pair.provenance == Provenance::kFt);

  auto bt = read_all_records(dir.file("bt.jsonl"), RecordFormat::kJsonl, {});
  REQUIRE(bt.size() == 2);
  for (const auto& pair : bt) {
    CHECK(pair.provenance == Provenance::kBtTagged);
    CHECK(pair.src.tokens()[0] == "<BT>");
  }

  auto tel = read_all_records(dir.file("tel.jsonl"), RecordFormat::kJsonl, {});
  CHECK(tel.size() == 6);  // 2 models x 3 sources

  auto ape = read_ape_records(dir.file("ape.jsonl"));
  CHECK(ape.size() == 4);  // balanced pairs pass the 0.5 gate
  auto sft = testutil::read_file(dir.file("sft.jsonl"));
  CHECK(std::count(sft.begin(), sft.end(), '\n') == 4);

  auto schedule = Schedule::load(dir.file("schedule.json"));
  CHECK(schedule.phases.size() == 4);
}

TEST_CASE("curriculum pipeline scores bins and samples") {
  testutil::TempDir dir;
  std::vector<SentencePair> bitext;
  for (int i = 0; i < 8; ++i) {
    // Half the targets come from the in-domain text, half are off-domain.
    std::string tgt = i % 2 == 0 ? "eins zwei drei" : "rot blau gruen";
    bitext.push_back(testutil::make_pair("src " + std::to_string(i), tgt,
                                         Provenance::kAuthentic, "en", "de"));
  }
  write_all_records(bitext, dir.file("bitext.jsonl"), RecordFormat::kJsonl);
  testutil::write_file(dir.file("in_dom.txt"),
                       "eins zwei drei\neins zwei drei vier\n");
  testutil::write_file(dir.file("out_dom.txt"),
                       "rot blau gruen\nblau rot gelb\n");

  json config{
      {"seed", 3},
      {"src_lang", "en"},
      {"tgt_lang", "de"},
      {"stages",
       json::array({json{{"name", "score"},
                         {"op", "curriculum_score"},
                         {"in", "bitext.jsonl"},
                         {"out", "scored.jsonl"},
                         {"in_lm", "in_dom.txt"},
                         {"out_lm", "out_dom.txt"},
                         {"order", 2}},
                    json{{"name", "bin"},
                         {"op", "curriculum_bins"},
                         {"in", "scored.jsonl"},
                         {"out", "bins.json"},
                         {"bins", 2},
                         {"phases", 3}},
                    json{{"name", "draw"},
                         {"op", "curriculum_sample"},
                         {"bins", "bins.json"},
                         {"in", "scored.jsonl"},
                         {"out", "batches.jsonl"},
                         {"phase", 2},
                         {"batch_size", 8},
                         {"batches", 3}}})}};
  testutil::write_file(dir.file("pipeline.json"), config.dump(2));

  run_pipeline(dir.file("pipeline.json"));

  auto scored = read_all_records(dir.file("scored.jsonl"),
                                 RecordFormat::kJsonl, {});
  REQUIRE(scored.size() == 8);
  for (const auto& pair : scored) {
    REQUIRE(pair.scores.count("q") == 1);
    REQUIRE(pair.scores.count("logprob_in") == 1);
    REQUIRE(pair.scores.count("logprob_out") == 1);
  }
  // In-domain targets sit strictly above off-domain ones.
  for (int i = 0; i < 8; i += 2) {
    CHECK(scored[i].scores.at("q") > scored[i + 1].scores.at("q"));
  }

  auto bins = CurriculumBins::load(dir.file("bins.json"));
  REQUIRE(bins.bins.size() == 2);
  CHECK(bins.schedule.size() == 3);
  // Bin 0 holds exactly the in-domain (even) record indices.
  std::set<size_t> bin0(bins.bins[0].begin(), bins.bins[0].end());
  CHECK(bin0 == std::set<size_t>{0, 2, 4, 6});

  std::istringstream batches(testutil::read_file(dir.file("batches.jsonl")));
  std::string line;
  int batch_count = 0;
  while (std::getline(batches, line)) {
    auto j = json::parse(line);
    CHECK(j["batch"] == batch_count);
    REQUIRE(j["records"].size() == 8);
    for (const auto& index : j["records"]) CHECK(index.get<size_t>() < 8);
    ++batch_count;
  }
  CHECK(batch_count == 3);
}

TEST_CASE("external score files feed the curriculum stage") {
  testutil::TempDir dir;
  write_bitext(dir.file("bitext.jsonl"), 3);
  // q = (in - out) / 3 target tokens.
  testutil::write_file(dir.file("scores.tsv"),
                       "0\t-1.0\t-4.0\n1\t-2.0\t-2.0\n2\t-9.0\t-3.0\n");
  json config{
      {"seed", 1},
      {"src_lang", "en"},
      {"tgt_lang", "de"},
      {"stages", json::array({json{{"name", "score"},
                                   {"op", "curriculum_score"},
                                   {"in", "bitext.jsonl"},
                                   {"out", "scored.jsonl"},
                                   {"scores", "scores.tsv"}}})}};
  testutil::write_file(dir.file("pipeline.json"), config.dump(2));
  Manifest manifest = run_pipeline(dir.file("pipeline.json"));

  auto scored = read_all_records(dir.file("scored.jsonl"),
                                 RecordFormat::kJsonl, {});
  REQUIRE(scored.size() == 3);
  CHECK(scored[0].scores.at("q") == doctest::Approx(1.0));
  CHECK(scored[1].scores.at("q") == doctest::Approx(0.0));
  CHECK(scored[2].scores.at("q") == doctest::Approx(-2.0));
  CHECK(manifest.stages[0].details["q_max"] == doctest::Approx(1.0));
  CHECK(manifest.stages[0].details["q_min"] == doctest::Approx(-2.0));
}

TEST_CASE("external qe scores gate the post-editing stage exactly") {
  testutil::TempDir dir;
  write_bitext(dir.file("bitext.jsonl"), 3);
  testutil::write_file(dir.file("fwd.tsv"), "alpha\teins\t1.0\n");
  testutil::write_file(dir.file("qe.tsv"), "0\t0.8\n1\t0.801\n2\t0.3\n");
  json config{
      {"seed", 1},
      {"src_lang", "en"},
      {"tgt_lang", "de"},
      {"stages", json::array({json{{"name", "gate"},
                                   {"op", "hypo"},
                                   {"in", "bitext.jsonl"},
                                   {"lexicon", "fwd.tsv"},
                                   {"qe_scores", "qe.tsv"},
                                   {"out", "ape.jsonl"}}})}};
  testutil::write_file(dir.file("pipeline.json"), config.dump(2));
  run_pipeline(dir.file("pipeline.json"));
  auto records = read_ape_records(dir.file("ape.jsonl"));
  REQUIRE(records.size() == 1);  // only the 0.801 record clears 0.8
  CHECK(records[0].qe_score == doctest::Approx(0.801));
}

TEST_CASE("reruns are byte-identical") {
  testutil::TempDir dir;
  write_bitext(dir.file("bitext.jsonl"), 6);
  testutil::write_file(dir.file("mono.txt"),
                       "alpha beta\nbeta beta\nalpha alpha\nbeta alpha\n");
  testutil::write_file(dir.file("lex.tsv"),
                       "alpha\teins\t0.5\nalpha\tzwei\t0.5\nbeta\tdrei\t1.0\n");
  json config{
      {"seed", 21},
      {"src_lang", "en"},
      {"tgt_lang", "de"},
      {"stages",
       json::array({json{{"name", "sample"},
                         {"op", "bt"},
                         {"mono", "mono.txt"},
                         {"lexicon", "lex.tsv"},
                         {"mono_lang", "en"},
                         {"output_lang", "de"},
                         {"mode", "sampling"},
                         {"out", "bt.jsonl"}},
                    json{{"name", "double"},
                         {"op", "bit"},
                         {"in", "bitext.jsonl"},
                         {"out", "bit.jsonl"}}})}};
  testutil::write_file(dir.file("pipeline.json"), config.dump(2));

  run_pipeline(dir.file("pipeline.json"), 0, dir.file("m1.json"));
  auto bt_first = testutil::read_file(dir.file("bt.jsonl"));
  auto bit_first = testutil::read_file(dir.file("bit.jsonl"));
  run_pipeline(dir.file("pipeline.json"), 0, dir.file("m2.json"));
  CHECK(testutil::read_file(dir.file("bt.jsonl")) == bt_first);
  CHECK(testutil::read_file(dir.file("bit.jsonl")) == bit_first);
  CHECK(testutil::read_file(dir.file("m1.json")) ==
        testutil::read_file(dir.file("m2.json")));
}

TEST_CASE("outputs do not depend on the job count") {
  testutil::TempDir dir;
  write_bitext(dir.file("bitext.jsonl"), 10);
  testutil::write_file(dir.file("fwd.tsv"),
                       "alpha\teins\t1.0\nbeta\tzwei\t1.0\n");
  testutil::write_file(dir.file("bwd.tsv"),
                       "eins\talpha\t1.0\nzwei\tbeta\t1.0\n");
  json config{{"seed", 5},
              {"src_lang", "en"},
              {"tgt_lang", "de"},
              {"stages", json::array({json{{"name", "round_trip"},
                                           {"op", "dd"},
                                           {"in", "bitext.jsonl"},
                                           {"out", "dd.jsonl"},
                                           {"fwd_lexicon", "fwd.tsv"},
                                           {"bwd_lexicon", "bwd.tsv"}}})}};
  testutil::write_file(dir.file("pipeline.json"), config.dump(2));

  auto serial = run_and_slurp(dir.file("pipeline.json"), dir.file("dd.jsonl"),
                              1);
  auto parallel = run_and_slurp(dir.file("pipeline.json"),
                                dir.file("dd.jsonl"), 8);
  CHECK(serial == parallel);
}

TEST_CASE("pipeline configs are validated") {
  testutil::TempDir dir;
  write_bitext(dir.file("in.jsonl"), 2);

  // No seed anywhere.
  json no_seed{{"stages", json::array({json{{"name", "s"},
                                            {"op", "stats"},
                                            {"in", "in.jsonl"},
                                            {"out", "out.json"}}})}};
  testutil::write_file(dir.file("no_seed.json"), no_seed.dump());
  CHECK_THROWS_AS(run_pipeline(dir.file("no_seed.json")), ConfigError);
  // A seed override substitutes for the config key.
  CHECK_NOTHROW(run_pipeline(dir.file("no_seed.json"), 0, "", 99));

  json no_stages{{"seed", 1}};
  testutil::write_file(dir.file("no_stages.json"), no_stages.dump());
  CHECK_THROWS_AS(run_pipeline(dir.file("no_stages.json")), ConfigError);

  json dup{{"seed", 1},
           {"stages",
            json::array({json{{"name", "s"},
                              {"op", "stats"},
                              {"in", "in.jsonl"},
                              {"out", "a.json"}},
                         json{{"name", "s"},
                              {"op", "stats"},
                              {"in", "in.jsonl"},
                              {"out", "b.json"}}})}};
  testutil::write_file(dir.file("dup.json"), dup.dump());
  CHECK_THROWS_AS(run_pipeline(dir.file("dup.json")), ConfigError);

  testutil::write_file(dir.file("broken.json"), "{not json");
  CHECK_THROWS_AS(run_pipeline(dir.file("broken.json")), ConfigError);
  CHECK_THROWS_AS(run_pipeline(dir.file("missing.json")), IoError);
}

TEST_CASE("stage failures carry the stage name") {
  testutil::TempDir dir;
  write_bitext(dir.file("in.jsonl"), 2);
  json config{{"seed", 1},
              {"stages", json::array({json{{"name", "mystery"},
                                           {"op", "frobnicate"},
                                           {"in", "in.jsonl"},
                                           {"out", "out.jsonl"}}})}};
  testutil::write_file(dir.file("pipeline.json"), config.dump());
  try {
    run_pipeline(dir.file("pipeline.json"));
    FAIL("expected a stage error");
  } catch (const Error& e) {
    std::string message = e.what();
    CHECK(message.find("stage 'mystery'") != std::string::npos);
    CHECK(message.find("frobnicate") != std::string::npos);
  }
}

TEST_CASE("binning without scores points at the missing stage") {
  testutil::TempDir dir;
  write_bitext(dir.file("in.jsonl"), 4);
  json config{{"seed", 1},
              {"stages", json::array({json{{"name", "bin"},
                                           {"op", "curriculum_bins"},
                                           {"in", "in.jsonl"},
                                           {"out", "bins.json"},
                                           {"bins", 2}}})}};
  testutil::write_file(dir.file("pipeline.json"), config.dump());
  try {
    run_pipeline(dir.file("pipeline.json"));
    FAIL("expected a missing-score error");
  } catch (const Error& e) {
    std::string message = e.what();
    CHECK(message.find("no difficulty scores") != std::string::npos);
  }
}

TEST_CASE("split stage rewrites monolingual text") {
  testutil::TempDir dir;
  testutil::write_file(dir.file("mono.txt"), "a b . c d\ne f\n");
  json config{{"seed", 1},
              {"src_lang", "en"},
              {"stages", json::array({json{{"name", "split"},
                                           {"op", "split_long"},
                                           {"in", "mono.txt"},
                                           {"out", "short.txt"},
                                           {"max_len", 3}}})}};
  testutil::write_file(dir.file("pipeline.json"), config.dump());
  Manifest manifest = run_pipeline(dir.file("pipeline.json"));
  CHECK(testutil::read_file(dir.file("short.txt")) == "a b .\nc d\ne f\n");
  CHECK(manifest.stages[0].details["input"] == 2);
  CHECK(manifest.stages[0].details["output"] == 3);
}
