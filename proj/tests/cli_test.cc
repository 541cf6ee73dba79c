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

#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>
#include <json.hpp>

#include "mtpipe/corpus.h"
#include "test_util.h"

using namespace mtpipe;
using nlohmann::json;

namespace {

std::string make_corpus(const testutil::TempDir& dir, const std::string& name,
                        int count) {
  std::vector<SentencePair> pairs;
  for (int i = 0; i < count; ++i) {
    pairs.push_back(testutil::make_pair(
        "alpha beta " + std::to_string(i), "eins zwei " + std::to_string(i),
        Provenance::kAuthentic, "en", "de"));
  }
  auto path = dir.file(name);
  write_all_records(pairs, path, RecordFormat::kJsonl);
  return path;
}

std::vector<json> parse_lines(const std::string& text) {
  std::vector<json> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(json::parse(line));
  }
  return out;
}

}  // namespace

TEST_CASE("help and argument errors use the documented exit codes") {
  auto help = testutil::run_cli("--help");
  CHECK(help.exit_code == 0);
  CHECK(help.output.find("corpus engineering") != std::string::npos);

  CHECK(testutil::run_cli("").exit_code == 2);
  CHECK(testutil::run_cli("preprocess").exit_code == 2);
  CHECK(testutil::run_cli("stats --in x --format bogus").exit_code == 2);
  CHECK(testutil::run_cli("no-such-command").exit_code == 2);
}

TEST_CASE("runtime failures exit with code 1") {
  testutil::TempDir dir;
  auto missing = testutil::run_cli("stats --in " + dir.file("absent.jsonl"));
  CHECK(missing.exit_code == 1);
  CHECK(missing.output.find("error:") != std::string::npos);
}

TEST_CASE("preprocess filters records and reports counts") {
  testutil::TempDir dir;
  std::vector<SentencePair> raw;
  raw.push_back(testutil::make_pair("a b", "c d", Provenance::kAuthentic,
                                    "en", "de"));
  raw.push_back(testutil::make_pair("a b", "c d", Provenance::kAuthentic,
                                    "en", "de"));
  raw.push_back(testutil::make_pair("e f", "g h", Provenance::kAuthentic,
                                    "en", "de"));
  write_all_records(raw, dir.file("raw.jsonl"), RecordFormat::kJsonl);

  auto result = testutil::run_cli("preprocess --in " + dir.file("raw.jsonl") +
                                  " --out " + dir.file("clean.jsonl") +
                                  " --report " + dir.file("report.json"));
  REQUIRE(result.exit_code == 0);
  auto kept = read_all_records(dir.file("clean.jsonl"), RecordFormat::kJsonl,
                               {});
  CHECK(kept.size() == 2);
  auto report = json::parse(testutil::read_file(dir.file("report.json")));
  CHECK(report["input_count"] == 3);
  CHECK(report["output_count"] == 2);

  // Without --out the surviving records go to stdout.
  auto streamed = testutil::run_cli("preprocess --in " + dir.file("raw.jsonl") +
                                    " --report " + dir.file("r2.json"));
  REQUIRE(streamed.exit_code == 0);
  CHECK(parse_lines(streamed.output).size() == 2);
}

TEST_CASE("split-long writes pieces to stdout") {
  testutil::TempDir dir;
  testutil::write_file(dir.file("mono.txt"), "a b . c d\n");
  auto result = testutil::run_cli("split-long --in " + dir.file("mono.txt") +
                                  " --max-len 3");
  REQUIRE(result.exit_code == 0);
  CHECK(result.output == "a b .\nc d\n");
}

TEST_CASE("bpe learn, apply, and decode round-trip text") {
  testutil::TempDir dir;
  auto corpus = make_corpus(dir, "corpus.jsonl", 5);
  auto learn = testutil::run_cli("bpe learn --in " + corpus +
                                 " --merges 30 --out " + dir.file("bpe.model"));
  REQUIRE(learn.exit_code == 0);

  testutil::write_file(dir.file("mono.txt"), "alpha beta gamma\nzwei eins\n");
  auto apply = testutil::run_cli("bpe apply --model " + dir.file("bpe.model") +
                                 " --in " + dir.file("mono.txt") +
                                 " --mono --lang en --out " +
                                 dir.file("enc.txt"));
  REQUIRE(apply.exit_code == 0);
  auto decode = testutil::run_cli("bpe decode --in " + dir.file("enc.txt") +
                                  " --lang en --out " + dir.file("dec.txt"));
  REQUIRE(decode.exit_code == 0);
  CHECK(testutil::read_file(dir.file("dec.txt")) ==
        testutil::read_file(dir.file("mono.txt")));

  // Record mode needs both side outputs.
  auto sides = testutil::run_cli("bpe apply --model " + dir.file("bpe.model") +
                                 " --in " + corpus + " --out-src " +
                                 dir.file("c.src") + " --out-tgt " +
                                 dir.file("c.tgt"));
  REQUIRE(sides.exit_code == 0);
  auto src_text = testutil::read_file(dir.file("c.src"));
  CHECK(std::count(src_text.begin(), src_text.end(), '\n') == 5);
  CHECK(testutil::run_cli("bpe apply --model " + dir.file("bpe.model") +
                          " --in " + corpus)
            .exit_code == 2);
}

TEST_CASE("augment subcommands emit records") {
  testutil::TempDir dir;
  auto corpus = make_corpus(dir, "corpus.jsonl", 3);
  testutil::write_file(dir.file("fwd.tsv"),
                       "alpha\teins\t1.0\nbeta\tzwei\t1.0\n");
  testutil::write_file(dir.file("bwd.tsv"),
                       "eins\talpha\t1.0\nzwei\tbeta\t1.0\n");
  testutil::write_file(dir.file("mono_src.txt"),
                       "alpha beta\nbeta beta\nalpha alpha\n");
  testutil::write_file(dir.file("mono_tgt.txt"), "eins zwei\nzwei zwei\n");

  auto bit = testutil::run_cli("augment bit --in " + corpus);
  REQUIRE(bit.exit_code == 0);
  CHECK(parse_lines(bit.output).size() == 6);

  auto dd = testutil::run_cli("augment dd --in " + corpus + " --fwd-lexicon " +
                              dir.file("fwd.tsv") + " --bwd-lexicon " +
                              dir.file("bwd.tsv") + " --src-lang en" +
                              " --tgt-lang de --out " + dir.file("dd.jsonl"));
  REQUIRE(dd.exit_code == 0);
  CHECK(read_all_records(dir.file("dd.jsonl"), RecordFormat::kJsonl, {})
            .size() == 9);

  auto ft = testutil::run_cli(
      "augment ft --in " + dir.file("mono_src.txt") + " --lexicon " +
      dir.file("fwd.tsv") +
      " --sample-size 2 --seed 3 --src-lang en --tgt-lang de");
  REQUIRE(ft.exit_code == 0);
  CHECK(parse_lines(ft.output).size() == 2);

  auto bt = testutil::run_cli("augment bt --in " + dir.file("mono_tgt.txt") +
                              " --lexicon " + dir.file("bwd.tsv") +
                              " --tagged --seed 3 --src-lang en --tgt-lang de");
  REQUIRE(bt.exit_code == 0);
  auto bt_lines = parse_lines(bt.output);
  REQUIRE(bt_lines.size() == 2);
  for (const auto& line : bt_lines) {
    CHECK(line["src"].get<std::string>().substr(0, 5) == "<BT> ");
  }

  auto tel = testutil::run_cli("augment tel --in " + dir.file("mono_src.txt") +
                               " --lexicon " + dir.file("fwd.tsv") +
                               " --lexicon " + dir.file("bwd.tsv") +
                               " --src-lang en --tgt-lang de");
  REQUIRE(tel.exit_code == 0);
  CHECK(parse_lines(tel.output).size() == 6);

  auto hypo = testutil::run_cli("augment hypo --in " + corpus + " --lexicon " +
                                dir.file("fwd.tsv") +
                                " --threshold 0.5 --src-lang en --tgt-lang de");
  REQUIRE(hypo.exit_code == 0);
  auto hypo_lines = parse_lines(hypo.output);
  REQUIRE(hypo_lines.size() == 3);
  for (const auto& line : hypo_lines) {
    CHECK(line["qe_score"].get<double>() == doctest::Approx(1.0));
    CHECK_FALSE(line["nbest"].empty());
  }

  auto sched = testutil::run_cli("augment schedule --authentic " + corpus +
                                 " --synthetic " + dir.file("dd.jsonl") +
                                 " --rounds 2");
  REQUIRE(sched.exit_code == 0);
  CHECK(json::parse(sched.output)["phases"].size() == 4);
}

TEST_CASE("curriculum subcommands chain through files") {
  testutil::TempDir dir;
  auto corpus = make_corpus(dir, "corpus.jsonl", 4);
  testutil::write_file(
      dir.file("scores.tsv"),
      "0\t-1.0\t-4.0\n1\t-2.0\t-2.0\n2\t-9.0\t-3.0\n3\t-1.0\t-7.0\n");

  auto score = testutil::run_cli("curriculum score --in " + corpus +
                                 " --scores " + dir.file("scores.tsv") +
                                 " --out " + dir.file("scored.jsonl"));
  REQUIRE(score.exit_code == 0);
  auto scored = read_all_records(dir.file("scored.jsonl"),
                                 RecordFormat::kJsonl, {});
  REQUIRE(scored.size() == 4);
  CHECK(scored[0].scores.at("q") == doctest::Approx(1.0));

  auto bins = testutil::run_cli("curriculum bins --in " +
                                dir.file("scored.jsonl") +
                                " --bins 2 --phases 3 --out " +
                                dir.file("bins.json"));
  REQUIRE(bins.exit_code == 0);
  auto bins_json = json::parse(testutil::read_file(dir.file("bins.json")));
  CHECK(bins_json["bins"].size() == 2);

  auto sample = testutil::run_cli(
      "curriculum sample --bins " + dir.file("bins.json") + " --in " +
      dir.file("scored.jsonl") + " --phase 2 --batch-size 4 --batches 2 " +
      "--seed 7");
  REQUIRE(sample.exit_code == 0);
  auto batches = parse_lines(sample.output);
  REQUIRE(batches.size() == 2);
  CHECK(batches[0]["records"].size() == 4);
}

TEST_CASE("bleu scoring reads plain text files") {
  testutil::TempDir dir;
  testutil::write_file(dir.file("hyp.txt"), "the cat sat\na b c d\n");
  testutil::write_file(dir.file("ref.txt"), "the cat sat\na b c d\n");
  auto result = testutil::run_cli("score bleu --hyp " + dir.file("hyp.txt") +
                                  " --ref " + dir.file("ref.txt") +
                                  " --lang en");
  REQUIRE(result.exit_code == 0);
  auto j = json::parse(result.output);
  CHECK(j["bleu"].get<double>() == doctest::Approx(100.0));
}

TEST_CASE("stats summarizes a corpus") {
  testutil::TempDir dir;
  auto corpus = make_corpus(dir, "corpus.jsonl", 4);
  auto result = testutil::run_cli("stats --in " + corpus);
  REQUIRE(result.exit_code == 0);
  auto j = json::parse(result.output);
  CHECK(j["pair_count"] == 4);
  CHECK(j["src_tokens"] == 12);
}

TEST_CASE("run executes a pipeline config and prints the manifest") {
  testutil::TempDir dir;
  auto corpus = make_corpus(dir, "corpus.jsonl", 3);
  json config{{"seed", 5},
              {"src_lang", "en"},
              {"tgt_lang", "de"},
              {"stages", json::array({json{{"name", "double"},
                                           {"op", "bit"},
                                           {"in", "corpus.jsonl"},
                                           {"out", "doubled.jsonl"}}})}};
  testutil::write_file(dir.file("pipeline.json"), config.dump(2));

  auto result = testutil::run_cli("run --config " + dir.file("pipeline.json") +
                                  " --manifest " + dir.file("manifest.json"));
  REQUIRE(result.exit_code == 0);
  auto manifest = json::parse(result.output);
  CHECK(manifest["seed"] == 5);
  REQUIRE(manifest["stages"].size() == 1);
  CHECK(manifest["stages"][0]["op"] == "bit");
  CHECK(json::parse(testutil::read_file(dir.file("manifest.json"))) ==
        manifest);

  // A config without a seed fails unless one is passed on the command line.
  json no_seed = config;
  no_seed.erase("seed");
  testutil::write_file(dir.file("no_seed.json"), no_seed.dump(2));
  CHECK(testutil::run_cli("run --config " + dir.file("no_seed.json"))
            .exit_code == 1);
  CHECK(testutil::run_cli("run --config " + dir.file("no_seed.json") +
                          " --seed 9")
            .exit_code == 0);
}

TEST_CASE("records can stream in tsv format") {
  testutil::TempDir dir;
  testutil::write_file(dir.file("corpus.tsv"), "a b\tc d\ne f\tg h\n");
  auto result = testutil::run_cli("augment bit --in " + dir.file("corpus.tsv") +
                                  " --format tsv --src-lang en --tgt-lang de");
  REQUIRE(result.exit_code == 0);
  std::istringstream lines(result.output);
  std::string line;
  std::vector<std::string> all;
  while (std::getline(lines, line)) all.push_back(line);
  REQUIRE(all.size() == 4);
  CHECK(all[0] == "a b\tc d\tAUTHENTIC");
  CHECK(all[2] == "c d\ta b\tBIT_REVERSED");
}
