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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>

#include "mtpipe/augment.h"
#include "mtpipe/corpus.h"
#include "mtpipe/curriculum.h"
#include "mtpipe/error.h"
#include "mtpipe/hash.h"
#include "mtpipe/preprocess.h"
#include "mtpipe/subword.h"
#include "mtpipe/text.h"
#include "mtpipe/translator.h"

namespace mtpipe {

namespace fs = std::filesystem;
using nlohmann::json;

std::string file_digest_hex(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  Fnv128 hash;
  char buf[65536];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    hash.update(std::string_view(buf, static_cast<size_t>(in.gcount())));
  }
  return to_hex(hash.digest());
}

std::string resolve_config_path(const std::string& path) {
  if (fs::exists(path)) return path;
  const char* dir = std::getenv(kConfigDirEnv);
  if (dir != nullptr && *dir != '\0') {
    fs::path candidate = fs::path(dir) / path;
    if (fs::exists(candidate)) return candidate.string();
  }
  throw IoError("config not found: " + path);
}

nlohmann::json Manifest::to_json() const {
  auto file_json = [](const File& f) {
    json j{{"path", f.path}, {"digest", f.digest}};
    if (f.records >= 0) j["records"] = f.records;
    return j;
  };
  json stage_list = json::array();
  for (const auto& stage : stages) {
    json inputs = json::array(), outputs = json::array();
    for (const auto& f : stage.inputs) inputs.push_back(file_json(f));
    for (const auto& f : stage.outputs) outputs.push_back(file_json(f));
    stage_list.push_back(json{{"name", stage.name},
                              {"op", stage.op},
                              {"params", stage.params},
                              {"inputs", inputs},
                              {"outputs", outputs},
                              {"details", stage.details}});
  }
  return json{{"version", version},
              {"seed", seed},
              {"jobs", jobs},
              {"config_digest", config_digest},
              {"stages", stage_list}};
}

void Manifest::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open file for writing: " + path);
  out << to_json().dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

nlohmann::json default_filter_config() {
  return json::array({json{{"name", "dedup"}},
                      json{{"name", "strip_invisible"}},
                      json{{"name", "normalize_width"}},
                      json{{"name", "normalize_punct"}},
                      json{{"name", "max_tokens"}},
                      json{{"name", "ratio"}}});
}

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string join_with_spaces(const std::vector<std::string>& tokens) {
  std::string out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

std::string req_str(const json& cfg, const char* key) {
  if (!cfg.contains(key) || !cfg.at(key).is_string()) {
    throw ConfigError(std::string("missing required string key '") + key +
                      "'");
  }
  return cfg.at(key).get<std::string>();
}

int64_t req_int(const json& cfg, const char* key) {
  if (!cfg.contains(key) || !cfg.at(key).is_number_integer()) {
    throw ConfigError(std::string("missing required integer key '") + key +
                      "'");
  }
  return cfg.at(key).get<int64_t>();
}

// Rows "index<TAB>score" exactly covering 0..expected-1.
std::vector<double> load_single_scores(const std::string& path,
                                       size_t expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open score file: " + path);
  std::vector<double> scores(expected, 0.0);
  std::vector<bool> seen(expected, false);
  std::string line;
  uint64_t lineno = 0;
  size_t rows = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      throw FormatError(path + ":" + std::to_string(lineno) +
                        ": expected index<TAB>score");
    }
    size_t index;
    double score;
    try {
      index = std::stoull(line.substr(0, tab));
      score = std::stod(line.substr(tab + 1));
    } catch (const std::exception&) {
      throw FormatError(path + ":" + std::to_string(lineno) + ": bad row");
    }
    if (index >= expected || seen[index]) {
      throw FormatError(path + ": bad or duplicate index " +
                        std::to_string(index));
    }
    seen[index] = true;
    scores[index] = score;
    ++rows;
  }
  if (rows != expected) {
    throw FormatError(path + ": " + std::to_string(rows) + " rows for " +
                      std::to_string(expected) + " records");
  }
  return scores;
}

struct StageCtx {
  const json& cfg;
  fs::path base;
  ReaderOptions reader_options;
  RecordFormat format;
  uint64_t seed = 0;
  int jobs = 1;
  Manifest::Stage* entry = nullptr;

  std::string resolve(const std::string& p) const {
    fs::path path(p);
    return path.is_absolute() ? p : (base / path).string();
  }
  void record_input(const std::string& path, int64_t records = -1) const {
    entry->inputs.push_back({path, file_digest_hex(resolve(path)), records});
  }
  void record_output(const std::string& path, int64_t records = -1) const {
    entry->outputs.push_back({path, file_digest_hex(resolve(path)), records});
  }
};

DictTranslator make_translator(const StageCtx& ctx,
                               const std::string& lexicon_path,
                               const std::string& output_lang) {
  return DictTranslator(lexicon_from_file(ctx.resolve(lexicon_path)),
                        output_lang);
}

std::vector<DifficultyScore> scores_from_records(
    const std::vector<SentencePair>& pairs) {
  std::vector<DifficultyScore> scores;
  scores.reserve(pairs.size());
  for (size_t i = 0; i < pairs.size(); ++i) {
    auto in_it = pairs[i].scores.find("logprob_in");
    auto out_it = pairs[i].scores.find("logprob_out");
    if (in_it == pairs[i].scores.end() || out_it == pairs[i].scores.end()) {
      throw InputError("record " + std::to_string(i) +
                       " has no difficulty scores; run a score stage first");
    }
    scores.push_back(difficulty_from_scores(
        in_it->second, out_it->second,
        static_cast<int64_t>(pairs[i].tgt.token_count())));
  }
  return scores;
}

// ---------------------------------------------------------------------------
// Stage implementations

void op_dedup(StageCtx& ctx) {
  std::string in = req_str(ctx.cfg, "in"), out = req_str(ctx.cfg, "out");
  ctx.record_input(in);
  RecordReader reader(ctx.resolve(in), ctx.format, ctx.reader_options);
  RecordWriter writer(ctx.resolve(out), ctx.format);
  Deduper deduper;
  SentencePair pair;
  uint64_t input = 0, kept = 0;
  while (reader.next(pair)) {
    ++input;
    if (!deduper.seen_before(pair)) {
      writer.write(pair);
      ++kept;
    }
  }
  writer.close();
  ctx.record_output(out, static_cast<int64_t>(kept));
  ctx.entry->details =
      json{{"input", input}, {"kept", kept}, {"dropped", input - kept}};
}

void op_filter_chain(StageCtx& ctx) {
  std::string in = req_str(ctx.cfg, "in"), out = req_str(ctx.cfg, "out");
  ctx.record_input(in);
  json filters = ctx.cfg.value("filters", default_filter_config());
  json resources_cfg = ctx.cfg.value("resources", json::object());

  FilterResources resources;
  T2sTable t2s;
  if (resources_cfg.contains("t2s")) {
    std::string path = resources_cfg.at("t2s").get<std::string>();
    ctx.record_input(path);
    t2s = T2sTable::load(ctx.resolve(path));
    resources.t2s = &t2s;
  }
  LidModel lid;
  if (resources_cfg.contains("lid_samples")) {
    std::map<std::string, std::string> samples;
    for (const auto& [lang, path] :
         resources_cfg.at("lid_samples").items()) {
      std::string p = path.get<std::string>();
      ctx.record_input(p);
      samples[lang] = slurp(ctx.resolve(p));
    }
    LidModel::Options options;
    options.order = resources_cfg.value("lid_order", 3);
    options.k = resources_cfg.value("lid_k", 0.5);
    lid = LidModel::train(samples, options);
    resources.lid = &lid;
  }

  bool needs_align = false;
  for (const auto& f : filters) {
    if (f.value("name", "") == "align") needs_align = true;
  }

  FilterReport report;
  uint64_t kept = 0;
  if (needs_align) {
    // The alignment model trains on the input corpus itself, so this path
    // holds the corpus in memory.
    auto pairs = read_all_records(ctx.resolve(in), ctx.format,
                                  ctx.reader_options);
    TranslationTable table = TranslationTable::train(
        pairs, resources_cfg.value("align_iterations", 5));
    resources.align = &table;
    FilterChain chain(filters, resources);
    RecordWriter writer(ctx.resolve(out), ctx.format);
    for (auto& pair : pairs) {
      if (chain.process(pair)) {
        writer.write(pair);
        ++kept;
      }
    }
    writer.close();
    report = chain.report();
  } else {
    FilterChain chain(filters, resources);
    RecordReader reader(ctx.resolve(in), ctx.format, ctx.reader_options);
    RecordWriter writer(ctx.resolve(out), ctx.format);
    SentencePair pair;
    while (reader.next(pair)) {
      if (chain.process(pair)) {
        writer.write(pair);
        ++kept;
      }
    }
    writer.close();
    report = chain.report();
  }
  ctx.record_output(out, static_cast<int64_t>(kept));
  ctx.entry->details = report.to_json();
}

void op_split_long(StageCtx& ctx) {
  std::string in = req_str(ctx.cfg, "in"), out = req_str(ctx.cfg, "out");
  std::string lang =
      ctx.cfg.value("lang", ctx.reader_options.default_src_lang);
  int max_len = static_cast<int>(ctx.cfg.value("max_len", 150));
  ctx.record_input(in);
  auto mono = read_mono(ctx.resolve(in), lang);
  auto pieces = split_long(mono, max_len);
  write_mono(pieces, ctx.resolve(out));
  ctx.record_output(out, static_cast<int64_t>(pieces.size()));
  ctx.entry->details =
      json{{"input", mono.size()}, {"output", pieces.size()}};
}

void op_bpe_learn(StageCtx& ctx) {
  std::vector<std::string> inputs;
  if (ctx.cfg.contains("inputs")) {
    inputs = ctx.cfg.at("inputs").get<std::vector<std::string>>();
  } else {
    inputs.push_back(req_str(ctx.cfg, "in"));
  }
  if (inputs.empty()) throw ConfigError("bpe_learn: no inputs");
  int merges = static_cast<int>(req_int(ctx.cfg, "merges"));
  std::string model_out = req_str(ctx.cfg, "model");

  std::vector<std::vector<std::string>> corpora(2);
  for (const auto& path : inputs) {
    ctx.record_input(path);
    RecordReader reader(ctx.resolve(path), ctx.format, ctx.reader_options);
    SentencePair pair;
    while (reader.next(pair)) {
      const auto& src = pair.src.tokens();
      const auto& tgt = pair.tgt.tokens();
      corpora[0].insert(corpora[0].end(), src.begin(), src.end());
      corpora[1].insert(corpora[1].end(), tgt.begin(), tgt.end());
    }
  }
  BpeModel model = BpeModel::learn(corpora, merges);
  model.save(ctx.resolve(model_out));
  ctx.record_output(model_out,
                    static_cast<int64_t>(model.merges().size()));
  ctx.entry->details = json{{"merges", model.merges().size()},
                            {"vocab", model.vocab().size()}};
}

void op_bpe_apply(StageCtx& ctx) {
  std::string model_path = req_str(ctx.cfg, "model");
  std::string in = req_str(ctx.cfg, "in");
  std::string out_src = req_str(ctx.cfg, "out_src");
  std::string out_tgt = req_str(ctx.cfg, "out_tgt");
  ctx.record_input(model_path);
  ctx.record_input(in);
  BpeModel model = BpeModel::load(ctx.resolve(model_path));
  RecordReader reader(ctx.resolve(in), ctx.format, ctx.reader_options);
  std::vector<std::string> src_lines, tgt_lines;
  SentencePair pair;
  while (reader.next(pair)) {
    src_lines.push_back(join_with_spaces(model.apply(pair.src)));
    tgt_lines.push_back(join_with_spaces(model.apply(pair.tgt)));
  }
  write_lines(src_lines, ctx.resolve(out_src));
  write_lines(tgt_lines, ctx.resolve(out_tgt));
  ctx.record_output(out_src, static_cast<int64_t>(src_lines.size()));
  ctx.record_output(out_tgt, static_cast<int64_t>(tgt_lines.size()));
  ctx.entry->details = json{{"records", src_lines.size()}};
}

void op_bit(StageCtx& ctx) {
  std::string in = req_str(ctx.cfg, "in"), out = req_str(ctx.cfg, "out");
  ctx.record_input(in);
  auto pairs = read_all_records(ctx.resolve(in), ctx.format,
                                ctx.reader_options);
  auto result = bit_reconstruct(pairs);
  write_all_records(result, ctx.resolve(out), ctx.format);
  ctx.record_output(out, static_cast<int64_t>(result.size()));
  ctx.entry->details =
      json{{"input", pairs.size()}, {"output", result.size()}};
}

void op_dd(StageCtx& ctx) {
  std::string in = req_str(ctx.cfg, "in"), out = req_str(ctx.cfg, "out");
  std::string fwd_lex = req_str(ctx.cfg, "fwd_lexicon");
  std::string bwd_lex = req_str(ctx.cfg, "bwd_lexicon");
  ctx.record_input(in);
  ctx.record_input(fwd_lex);
  ctx.record_input(bwd_lex);
  DictTranslator fwd = make_translator(
      ctx, fwd_lex,
      ctx.cfg.value("fwd_output_lang", ctx.reader_options.default_tgt_lang));
  DictTranslator bwd = make_translator(
      ctx, bwd_lex,
      ctx.cfg.value("bwd_output_lang", ctx.reader_options.default_src_lang));
  auto pairs = read_all_records(ctx.resolve(in), ctx.format,
                                ctx.reader_options);
  uint64_t skipped = 0;
  auto result = dd_generate(pairs, fwd, bwd, &skipped, ctx.jobs);
  if (ctx.cfg.value("dedup", false)) result = dedup(result);
  write_all_records(result, ctx.resolve(out), ctx.format);
  ctx.record_output(out, static_cast<int64_t>(result.size()));
  ctx.entry->details = json{{"input", pairs.size()},
                            {"output", result.size()},
                            {"skipped", skipped}};
}

void op_ft(StageCtx& ctx) {
  std::string mono = req_str(ctx.cfg, "mono"), out = req_str(ctx.cfg, "out");
  std::string lexicon = req_str(ctx.cfg, "lexicon");
  size_t sample_size = static_cast<size_t>(req_int(ctx.cfg, "sample_size"));
  ctx.record_input(mono);
  ctx.record_input(lexicon);
  auto sentences = read_mono(
      ctx.resolve(mono),
      ctx.cfg.value("mono_lang", ctx.reader_options.default_src_lang));
  DictTranslator teacher = make_translator(
      ctx, lexicon,
      ctx.cfg.value("output_lang", ctx.reader_options.default_tgt_lang));
  auto result =
      ft_generate(sentences, teacher, sample_size, ctx.seed, ctx.jobs);
  write_all_records(result, ctx.resolve(out), ctx.format);
  ctx.record_output(out, static_cast<int64_t>(result.size()));
  ctx.entry->details =
      json{{"mono", sentences.size()}, {"output", result.size()}};
}

void op_bt(StageCtx& ctx) {
  std::string mono = req_str(ctx.cfg, "mono"), out = req_str(ctx.cfg, "out");
  std::string lexicon = req_str(ctx.cfg, "lexicon");
  ctx.record_input(mono);
  ctx.record_input(lexicon);
  auto sentences = read_mono(
      ctx.resolve(mono),
      ctx.cfg.value("mono_lang", ctx.reader_options.default_tgt_lang));
  DictTranslator reverse = make_translator(
      ctx, lexicon,
      ctx.cfg.value("output_lang", ctx.reader_options.default_src_lang));
  BtOptions options;
  options.mode = decode_mode_from_string(ctx.cfg.value("mode", "beam"));
  options.tagged = ctx.cfg.value("tagged", false);
  options.tag = ctx.cfg.value("tag", std::string(BpeModel::kDefaultProtected));
  options.temperature = ctx.cfg.value("temperature", 1.0);
  options.seed = ctx.seed;
  auto result = bt_generate(sentences, reverse, options, ctx.jobs);
  write_all_records(result, ctx.resolve(out), ctx.format);
  ctx.record_output(out, static_cast<int64_t>(result.size()));
  ctx.entry->details =
      json{{"mono", sentences.size()}, {"output", result.size()}};
}

void op_tel(StageCtx& ctx) {
  std::string mono = req_str(ctx.cfg, "mono"), out = req_str(ctx.cfg, "out");
  if (!ctx.cfg.contains("lexicons")) {
    throw ConfigError("missing required key 'lexicons'");
  }
  auto lexicons = ctx.cfg.at("lexicons").get<std::vector<std::string>>();
  ctx.record_input(mono);
  std::string output_lang =
      ctx.cfg.value("output_lang", ctx.reader_options.default_tgt_lang);
  std::vector<std::unique_ptr<DictTranslator>> owned;
  std::vector<const Translator*> models;
  for (const auto& path : lexicons) {
    ctx.record_input(path);
    owned.push_back(std::make_unique<DictTranslator>(
        lexicon_from_file(ctx.resolve(path)), output_lang));
    models.push_back(owned.back().get());
  }
  auto sentences = read_mono(
      ctx.resolve(mono),
      ctx.cfg.value("mono_lang", ctx.reader_options.default_src_lang));
  auto result = tel_build(sentences, models, ctx.jobs);
  if (ctx.cfg.value("dedup", false)) result = dedup(result);
  write_all_records(result, ctx.resolve(out), ctx.format);
  ctx.record_output(out, static_cast<int64_t>(result.size()));
  ctx.entry->details = json{{"models", models.size()},
                            {"mono", sentences.size()},
                            {"output", result.size()}};
}

void op_merge(StageCtx& ctx) {
  if (!ctx.cfg.contains("inputs")) {
    throw ConfigError("missing required key 'inputs'");
  }
  auto inputs = ctx.cfg.at("inputs").get<std::vector<std::string>>();
  if (inputs.empty()) throw ConfigError("merge: no inputs");
  std::string out = req_str(ctx.cfg, "out");
  bool use_dedup = ctx.cfg.value("dedup", false);
  Deduper deduper;
  RecordWriter writer(ctx.resolve(out), ctx.format);
  uint64_t written = 0;
  for (const auto& path : inputs) {
    ctx.record_input(path);
    RecordReader reader(ctx.resolve(path), ctx.format, ctx.reader_options);
    SentencePair pair;
    while (reader.next(pair)) {
      if (use_dedup && deduper.seen_before(pair)) continue;
      writer.write(pair);
      ++written;
    }
  }
  writer.close();
  ctx.record_output(out, static_cast<int64_t>(written));
  ctx.entry->details = json{{"inputs", inputs.size()}, {"output", written}};
}

void op_at_schedule(StageCtx& ctx) {
  std::string authentic = req_str(ctx.cfg, "authentic");
  std::string out = req_str(ctx.cfg, "out");
  std::vector<std::string> synthetic;
  if (ctx.cfg.contains("synthetic")) {
    synthetic = ctx.cfg.at("synthetic").get<std::vector<std::string>>();
  }
  int rounds = static_cast<int>(ctx.cfg.value("rounds", 1));
  ctx.record_input(authentic);
  std::vector<std::string> synthetic_resolved;
  for (const auto& path : synthetic) {
    ctx.record_input(path);
    synthetic_resolved.push_back(ctx.resolve(path));
  }
  Schedule schedule =
      at_schedule(ctx.resolve(authentic), synthetic_resolved, rounds);
  schedule.save(ctx.resolve(out));
  ctx.record_output(out, static_cast<int64_t>(schedule.phases.size()));
  ctx.entry->details = json{{"phases", schedule.phases.size()},
                            {"synthetic_datasets", synthetic.size()}};
}

void op_hypo(StageCtx& ctx) {
  std::string in = req_str(ctx.cfg, "in"), out = req_str(ctx.cfg, "out");
  std::string lexicon = req_str(ctx.cfg, "lexicon");
  ctx.record_input(in);
  ctx.record_input(lexicon);
  DictTranslator base = make_translator(
      ctx, lexicon,
      ctx.cfg.value("output_lang", ctx.reader_options.default_tgt_lang));
  HypoOptions options;
  options.threshold = ctx.cfg.value("threshold", 0.8);
  options.n = static_cast<int>(ctx.cfg.value("n", 10));
  auto pairs = read_all_records(ctx.resolve(in), ctx.format,
                                ctx.reader_options);

  QualityFn qe = length_ratio_qe;
  if (ctx.cfg.contains("qe_scores")) {
    std::string path = ctx.cfg.at("qe_scores").get<std::string>();
    ctx.record_input(path);
    auto external = load_single_scores(ctx.resolve(path), pairs.size());
    for (size_t i = 0; i < pairs.size(); ++i) {
      pairs[i].scores["qe"] = external[i];
    }
    qe = [](const SentencePair& pair) { return pair.scores.at("qe"); };
  }

  auto records = hypo_build(pairs, base, qe, options, ctx.jobs);
  write_ape_records(ctx.resolve(out), records);
  ctx.record_output(out, static_cast<int64_t>(records.size()));

  if (ctx.cfg.contains("sft_out")) {
    std::string tmpl = ctx.cfg.value("template", kDefaultApeTemplate);
    std::string sft_out = ctx.cfg.at("sft_out").get<std::string>();
    std::ofstream sft(ctx.resolve(sft_out), std::ios::binary);
    if (!sft) throw IoError("cannot open file for writing: " + sft_out);
    for (const auto& record : records) {
      sft << ape_sft_record(record, tmpl).dump() << '\n';
    }
    if (!sft) throw IoError("write failed: " + sft_out);
    ctx.record_output(sft_out, static_cast<int64_t>(records.size()));
  }
  ctx.entry->details =
      json{{"input", pairs.size()}, {"kept", records.size()}};
}

void op_curriculum_score(StageCtx& ctx) {
  std::string in = req_str(ctx.cfg, "in"), out = req_str(ctx.cfg, "out");
  ctx.record_input(in);
  auto pairs = read_all_records(ctx.resolve(in), ctx.format,
                                ctx.reader_options);
  std::vector<DifficultyScore> scores;
  if (ctx.cfg.contains("scores")) {
    std::string path = ctx.cfg.at("scores").get<std::string>();
    ctx.record_input(path);
    auto external = load_external_scores(ctx.resolve(path), pairs.size());
    scores.reserve(pairs.size());
    for (size_t i = 0; i < pairs.size(); ++i) {
      scores.push_back(difficulty_from_scores(
          external[i].first, external[i].second,
          static_cast<int64_t>(pairs[i].tgt.token_count())));
    }
  } else {
    std::string in_lm_path = req_str(ctx.cfg, "in_lm");
    std::string out_lm_path = req_str(ctx.cfg, "out_lm");
    ctx.record_input(in_lm_path);
    ctx.record_input(out_lm_path);
    std::string lm_lang =
        ctx.cfg.value("lm_lang", ctx.reader_options.default_tgt_lang);
    int order = static_cast<int>(ctx.cfg.value("order", 3));
    double k = ctx.cfg.value("k", 0.5);
    NgramLm in_lm =
        NgramLm::train(read_mono(ctx.resolve(in_lm_path), lm_lang), order, k);
    NgramLm out_lm = NgramLm::train(read_mono(ctx.resolve(out_lm_path), lm_lang),
                                    order, k);
    TargetLmScorer in_scorer(&in_lm), out_scorer(&out_lm);
    scores = domain_features(pairs, in_scorer, out_scorer, ctx.jobs);
  }
  for (size_t i = 0; i < pairs.size(); ++i) {
    pairs[i].scores["q"] = scores[i].q;
    pairs[i].scores["logprob_in"] = scores[i].logprob_in;
    pairs[i].scores["logprob_out"] = scores[i].logprob_out;
  }
  write_all_records(pairs, ctx.resolve(out), ctx.format);
  ctx.record_output(out, static_cast<int64_t>(pairs.size()));
  double q_min = 0.0, q_max = 0.0;
  if (!scores.empty()) {
    q_min = q_max = scores[0].q;
    for (const auto& s : scores) {
      q_min = std::min(q_min, s.q);
      q_max = std::max(q_max, s.q);
    }
  }
  ctx.entry->details =
      json{{"records", pairs.size()}, {"q_min", q_min}, {"q_max", q_max}};
}

void op_curriculum_bins(StageCtx& ctx) {
  std::string in = req_str(ctx.cfg, "in"), out = req_str(ctx.cfg, "out");
  int num_bins = static_cast<int>(ctx.cfg.value("bins", 4));
  int num_phases = static_cast<int>(ctx.cfg.value("phases", 4));
  ctx.record_input(in);
  auto pairs = read_all_records(ctx.resolve(in), ctx.format,
                                ctx.reader_options);
  auto scores = scores_from_records(pairs);
  CurriculumBins bins = build_bins(scores, num_bins);
  bins.schedule = default_schedule(num_bins, num_phases);
  bins.save(ctx.resolve(out));
  ctx.record_output(out, static_cast<int64_t>(bins.bins.size()));
  json sizes = json::array();
  for (const auto& bin : bins.bins) sizes.push_back(bin.size());
  ctx.entry->details = json{{"bins", bins.bins.size()},
                            {"phases", bins.schedule.size()},
                            {"sizes", sizes}};
}

void op_curriculum_sample(StageCtx& ctx) {
  std::string bins_path = req_str(ctx.cfg, "bins");
  std::string in = req_str(ctx.cfg, "in"), out = req_str(ctx.cfg, "out");
  ctx.record_input(bins_path);
  ctx.record_input(in);
  CurriculumBins bins = CurriculumBins::load(ctx.resolve(bins_path));
  auto pairs = read_all_records(ctx.resolve(in), ctx.format,
                                ctx.reader_options);
  auto scores = scores_from_records(pairs);
  SampleOptions options;
  options.phase = static_cast<int>(ctx.cfg.value("phase", 0));
  options.batch_size = static_cast<int>(ctx.cfg.value("batch_size", 32));
  options.num_batches = static_cast<int>(ctx.cfg.value("batches", 1));
  options.epoch_coverage = ctx.cfg.value("epoch_coverage", false);
  options.seed = ctx.seed;
  auto batches = cl_sample(bins, scores, options);
  std::ofstream outf(ctx.resolve(out), std::ios::binary);
  if (!outf) throw IoError("cannot open file for writing: " + out);
  for (size_t b = 0; b < batches.size(); ++b) {
    outf << json{{"batch", b}, {"records", batches[b]}}.dump() << '\n';
  }
  if (!outf) throw IoError("write failed: " + out);
  ctx.record_output(out, static_cast<int64_t>(batches.size()));
  ctx.entry->details = json{{"batches", batches.size()},
                            {"batch_size", options.batch_size},
                            {"phase", options.phase}};
}

void op_stats(StageCtx& ctx) {
  std::string in = req_str(ctx.cfg, "in"), out = req_str(ctx.cfg, "out");
  ctx.record_input(in);
  RecordReader reader(ctx.resolve(in), ctx.format, ctx.reader_options);
  CorpusStats stats = compute_stats(reader);
  std::ofstream outf(ctx.resolve(out), std::ios::binary);
  if (!outf) throw IoError("cannot open file for writing: " + out);
  outf << stats.to_json().dump(2) << '\n';
  if (!outf) throw IoError("write failed: " + out);
  ctx.record_output(out);
  ctx.entry->details = stats.to_json();
}

void run_stage(const std::string& op, StageCtx& ctx) {
  if (op == "dedup") {
    op_dedup(ctx);
  } else if (op == "filter_chain" || op == "preprocess") {
    op_filter_chain(ctx);
  } else if (op == "split_long") {
    op_split_long(ctx);
  } else if (op == "bpe_learn") {
    op_bpe_learn(ctx);
  } else if (op == "bpe_apply") {
    op_bpe_apply(ctx);
  } else if (op == "bit") {
    op_bit(ctx);
  } else if (op == "dd") {
    op_dd(ctx);
  } else if (op == "ft") {
    op_ft(ctx);
  } else if (op == "bt") {
    op_bt(ctx);
  } else if (op == "tel") {
    op_tel(ctx);
  } else if (op == "merge") {
    op_merge(ctx);
  } else if (op == "at_schedule") {
    op_at_schedule(ctx);
  } else if (op == "hypo") {
    op_hypo(ctx);
  } else if (op == "curriculum_score") {
    op_curriculum_score(ctx);
  } else if (op == "curriculum_bins") {
    op_curriculum_bins(ctx);
  } else if (op == "curriculum_sample") {
    op_curriculum_sample(ctx);
  } else if (op == "stats") {
    op_stats(ctx);
  } else {
    throw ConfigError("unknown op '" + op + "'");
  }
}

}  // namespace

Manifest run_pipeline(const std::string& config_path, int jobs_override,
                      const std::string& manifest_path,
                      std::optional<uint64_t> seed_override) {
  std::string resolved_config = resolve_config_path(config_path);
  json config;
  {
    std::ifstream in(resolved_config, std::ios::binary);
    if (!in) throw IoError("cannot open config: " + resolved_config);
    try {
      in >> config;
    } catch (const json::exception& e) {
      throw ConfigError(resolved_config + ": " + e.what());
    }
  }

  if (!config.contains("seed") && !seed_override) {
    throw ConfigError("config must set a seed (no wall-clock defaults)");
  }
  uint64_t seed;
  try {
    seed = seed_override ? *seed_override : config.at("seed").get<uint64_t>();
  } catch (const json::exception&) {
    throw ConfigError("config seed must be a non-negative integer");
  }
  int jobs = jobs_override > 0 ? jobs_override
                               : static_cast<int>(config.value("jobs", 1));
  if (jobs < 1) throw ConfigError("jobs must be >= 1");

  ReaderOptions reader_options;
  reader_options.default_src_lang = config.value("src_lang", "en");
  reader_options.default_tgt_lang = config.value("tgt_lang", "zh");
  RecordFormat format =
      record_format_from_string(config.value("format", "jsonl"));

  if (!config.contains("stages") || !config.at("stages").is_array() ||
      config.at("stages").empty()) {
    throw ConfigError("config must list at least one stage");
  }

  fs::path base = fs::absolute(fs::path(resolved_config)).parent_path();

  Manifest manifest;
  manifest.seed = seed;
  manifest.jobs = jobs;
  manifest.config_digest = file_digest_hex(resolved_config);

  std::set<std::string> names;
  for (const auto& stage_cfg : config.at("stages")) {
    std::string name = req_str(stage_cfg, "name");
    std::string op = req_str(stage_cfg, "op");
    if (!names.insert(name).second) {
      throw ConfigError("duplicate stage name '" + name + "'");
    }

    Manifest::Stage entry;
    entry.name = name;
    entry.op = op;
    entry.params = json::object();
    for (const auto& [key, value] : stage_cfg.items()) {
      if (key != "name" && key != "op") entry.params[key] = value;
    }
    entry.details = json::object();

    StageCtx ctx{stage_cfg, base,     reader_options, format,
                 derive_seed(seed, name), jobs,       &entry};
    try {
      run_stage(op, ctx);
    } catch (const Error& e) {
      throw Error("stage '" + name + "' (" + op + "): " + e.what());
    }
    manifest.stages.push_back(std::move(entry));
  }

  std::string out_path = manifest_path;
  if (out_path.empty() && config.contains("manifest")) {
    out_path = config.at("manifest").get<std::string>();
  }
  if (!out_path.empty()) {
    fs::path p(out_path);
    manifest.save(p.is_absolute() ? out_path : (base / p).string());
  }
  return manifest;
}

}  // namespace mtpipe
