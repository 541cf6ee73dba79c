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

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mtpipe/augment.h"
#include "mtpipe/corpus.h"
#include "mtpipe/curriculum.h"
#include "mtpipe/error.h"
#include "mtpipe/metrics.h"
#include "mtpipe/pipeline.h"
#include "mtpipe/preprocess.h"
#include "mtpipe/subword.h"
#include "mtpipe/text.h"
#include "mtpipe/translator.h"

namespace {

using nlohmann::json;

struct Opts {
  uint64_t seed = 0;
  std::string format = "jsonl";
  std::string src_lang = "en";
  std::string tgt_lang = "zh";
  int jobs = 1;

  std::string in, out, model;
  std::vector<std::string> inputs;
  int merges = 8000;
  std::vector<std::string> protected_tokens{"<BT>"};
  bool mono_mode = false;
  std::string lang;
  std::string out_src, out_tgt;

  std::string filters_path, t2s_path, report_path;
  std::vector<std::string> lid_samples;
  int lid_order = 3;
  double lid_k = 0.5;
  int align_iterations = 5;
  int max_len = 150;

  std::string lexicon, fwd_lexicon, bwd_lexicon;
  std::vector<std::string> lexicons;
  std::string mono_lang, output_lang, fwd_lang, bwd_lang;
  bool dedup_records = false;
  uint64_t sample_size = 0;
  std::string mode = "beam";
  bool tagged = false;
  std::string tag = "<BT>";
  double temperature = 1.0;
  double threshold = 0.8;
  int nbest = 10;
  std::string qe_scores, sft_out, template_file;
  std::string authentic;
  std::vector<std::string> synthetic;
  int rounds = 1;

  std::string scores_path, in_lm, out_lm, lm_lang;
  int order = 3;
  double k = 0.5;
  int num_bins = 4, num_phases = 4;
  std::string bins_path;
  int phase = 0, batch_size = 32, batches = 1;
  bool epoch_coverage = false;

  std::string hyp, ref;
  int max_n = 4;
  std::string smoothing = "none";

  std::string config_path, manifest_path;
};

mtpipe::RecordFormat fmt(const Opts& o) {
  return mtpipe::record_format_from_string(o.format);
}

mtpipe::ReaderOptions reader_opts(const Opts& o) {
  mtpipe::ReaderOptions r;
  r.default_src_lang = o.src_lang;
  r.default_tgt_lang = o.tgt_lang;
  return r;
}

void emit_records(const std::vector<mtpipe::SentencePair>& pairs,
                  const Opts& o) {
  if (o.out.empty()) {
    for (const auto& pair : pairs) {
      std::cout << mtpipe::record_to_line(pair, fmt(o)) << '\n';
    }
  } else {
    mtpipe::write_all_records(pairs, o.out, fmt(o));
  }
}

void emit_lines(const std::vector<std::string>& lines, const std::string& out) {
  if (out.empty()) {
    for (const auto& line : lines) std::cout << line << '\n';
  } else {
    mtpipe::write_lines(lines, out);
  }
}

void emit_doc(const json& doc, const std::string& out) {
  if (out.empty()) {
    std::cout << doc.dump(2) << '\n';
  } else {
    std::ofstream f(out, std::ios::binary);
    if (!f) throw mtpipe::IoError("cannot open file for writing: " + out);
    f << doc.dump(2) << '\n';
    if (!f) throw mtpipe::IoError("write failed: " + out);
  }
}

json load_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw mtpipe::IoError("cannot open file: " + path);
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    throw mtpipe::FormatError(path + ": " + e.what());
  }
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw mtpipe::IoError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

mtpipe::DictTranslator load_translator(const std::string& lexicon,
                                       const std::string& output_lang) {
  return mtpipe::DictTranslator(mtpipe::lexicon_from_file(lexicon),
                                output_lang);
}

void run_preprocess(const Opts& o) {
  json filters = o.filters_path.empty() ? mtpipe::default_filter_config()
                                        : load_json_file(o.filters_path);
  mtpipe::FilterResources resources;
  mtpipe::T2sTable t2s;
  if (!o.t2s_path.empty()) {
    t2s = mtpipe::T2sTable::load(o.t2s_path);
    resources.t2s = &t2s;
  }
  mtpipe::LidModel lid;
  if (!o.lid_samples.empty()) {
    std::map<std::string, std::string> samples;
    for (const auto& spec : o.lid_samples) {
      size_t eq = spec.find('=');
      if (eq == std::string::npos || eq == 0) {
        throw CLI::ValidationError("--lid-sample", "expected lang=path");
      }
      samples[spec.substr(0, eq)] = slurp(spec.substr(eq + 1));
    }
    mtpipe::LidModel::Options options;
    options.order = o.lid_order;
    options.k = o.lid_k;
    lid = mtpipe::LidModel::train(samples, options);
    resources.lid = &lid;
  }

  bool needs_align = false;
  for (const auto& f : filters) {
    if (f.value("name", "") == "align") needs_align = true;
  }

  mtpipe::FilterReport report;
  mtpipe::TranslationTable table;
  if (needs_align) {
    auto pairs = mtpipe::read_all_records(o.in, fmt(o), reader_opts(o));
    table = mtpipe::TranslationTable::train(pairs, o.align_iterations);
    resources.align = &table;
    mtpipe::FilterChain chain(filters, resources);
    std::vector<mtpipe::SentencePair> kept;
    for (auto& pair : pairs) {
      if (chain.process(pair)) kept.push_back(pair);
    }
    emit_records(kept, o);
    report = chain.report();
  } else {
    mtpipe::FilterChain chain(filters, resources);
    mtpipe::RecordReader reader(o.in, fmt(o), reader_opts(o));
    std::unique_ptr<mtpipe::RecordWriter> writer;
    if (!o.out.empty()) {
      writer = std::make_unique<mtpipe::RecordWriter>(o.out, fmt(o));
    }
    mtpipe::SentencePair pair;
    while (reader.next(pair)) {
      if (!chain.process(pair)) continue;
      if (writer) {
        writer->write(pair);
      } else {
        std::cout << mtpipe::record_to_line(pair, fmt(o)) << '\n';
      }
    }
    if (writer) writer->close();
    report = chain.report();
  }
  if (!o.report_path.empty()) {
    emit_doc(report.to_json(), o.report_path);
  } else {
    std::cerr << "kept " << report.output_count << " of "
              << report.input_count << " records\n";
  }
}

void run_split_long(const Opts& o) {
  std::string lang = o.lang.empty() ? o.src_lang : o.lang;
  auto mono = mtpipe::read_mono(o.in, lang);
  auto pieces = mtpipe::split_long(mono, o.max_len);
  std::vector<std::string> lines;
  lines.reserve(pieces.size());
  for (const auto& s : pieces) lines.push_back(s.text());
  emit_lines(lines, o.out);
}

void run_bpe_learn(const Opts& o) {
  std::vector<std::vector<std::string>> corpora(2);
  for (const auto& path : o.inputs) {
    mtpipe::RecordReader reader(path, fmt(o), reader_opts(o));
    mtpipe::SentencePair pair;
    while (reader.next(pair)) {
      const auto& src = pair.src.tokens();
      const auto& tgt = pair.tgt.tokens();
      corpora[0].insert(corpora[0].end(), src.begin(), src.end());
      corpora[1].insert(corpora[1].end(), tgt.begin(), tgt.end());
    }
  }
  mtpipe::BpeModel::LearnOptions options;
  options.protected_tokens.clear();
  for (const auto& t : o.protected_tokens) options.protected_tokens.insert(t);
  auto model = mtpipe::BpeModel::learn(corpora, o.merges, options);
  model.save(o.out);
  std::cerr << "learned " << model.merges().size() << " merges\n";
}

void run_bpe_apply(const Opts& o) {
  std::set<std::string> protected_tokens(o.protected_tokens.begin(),
                                         o.protected_tokens.end());
  auto model = mtpipe::BpeModel::load(o.model, protected_tokens);
  auto join = [](const std::vector<std::string>& tokens) {
    std::string out;
    for (size_t i = 0; i < tokens.size(); ++i) {
      if (i) out.push_back(' ');
      out += tokens[i];
    }
    return out;
  };
  if (o.mono_mode) {
    std::string lang = o.lang.empty() ? o.src_lang : o.lang;
    auto mono = mtpipe::read_mono(o.in, lang);
    std::vector<std::string> lines;
    lines.reserve(mono.size());
    for (const auto& s : mono) lines.push_back(join(model.apply(s)));
    emit_lines(lines, o.out);
    return;
  }
  if (o.out_src.empty() || o.out_tgt.empty()) {
    throw CLI::RequiredError("--out-src and --out-tgt (or use --mono)");
  }
  mtpipe::RecordReader reader(o.in, fmt(o), reader_opts(o));
  std::vector<std::string> src_lines, tgt_lines;
  mtpipe::SentencePair pair;
  while (reader.next(pair)) {
    src_lines.push_back(join(model.apply(pair.src)));
    tgt_lines.push_back(join(model.apply(pair.tgt)));
  }
  mtpipe::write_lines(src_lines, o.out_src);
  mtpipe::write_lines(tgt_lines, o.out_tgt);
}

void run_bpe_decode(const Opts& o) {
  std::string lang = o.lang.empty() ? o.src_lang : o.lang;
  mtpipe::TokenizerKind kind = mtpipe::tokenizer_for_lang(lang);
  auto lines = mtpipe::read_lines(o.in);
  std::vector<std::string> out;
  out.reserve(lines.size());
  for (const auto& line : lines) {
    auto subwords =
        mtpipe::tokenize(line, mtpipe::TokenizerKind::kWhitespace);
    out.push_back(mtpipe::join_tokens(mtpipe::bpe_decode(subwords), kind));
  }
  emit_lines(out, o.out);
}

void run_bit(const Opts& o) {
  auto pairs = mtpipe::read_all_records(o.in, fmt(o), reader_opts(o));
  emit_records(mtpipe::bit_reconstruct(pairs), o);
}

void run_dd(const Opts& o) {
  std::string fwd_lang = o.fwd_lang.empty() ? o.tgt_lang : o.fwd_lang;
  std::string bwd_lang = o.bwd_lang.empty() ? o.src_lang : o.bwd_lang;
  auto fwd = load_translator(o.fwd_lexicon, fwd_lang);
  auto bwd = load_translator(o.bwd_lexicon, bwd_lang);
  auto pairs = mtpipe::read_all_records(o.in, fmt(o), reader_opts(o));
  uint64_t skipped = 0;
  auto result = mtpipe::dd_generate(pairs, fwd, bwd, &skipped, o.jobs);
  if (o.dedup_records) result = mtpipe::dedup(result);
  emit_records(result, o);
  if (skipped > 0) std::cerr << "skipped " << skipped << " records\n";
}

void run_ft(const Opts& o) {
  std::string mono_lang = o.mono_lang.empty() ? o.src_lang : o.mono_lang;
  std::string output_lang = o.output_lang.empty() ? o.tgt_lang : o.output_lang;
  auto mono = mtpipe::read_mono(o.in, mono_lang);
  auto teacher = load_translator(o.lexicon, output_lang);
  emit_records(
      mtpipe::ft_generate(mono, teacher, o.sample_size, o.seed, o.jobs), o);
}

void run_bt(const Opts& o) {
  std::string mono_lang = o.mono_lang.empty() ? o.tgt_lang : o.mono_lang;
  std::string output_lang = o.output_lang.empty() ? o.src_lang : o.output_lang;
  auto mono = mtpipe::read_mono(o.in, mono_lang);
  auto reverse = load_translator(o.lexicon, output_lang);
  mtpipe::BtOptions options;
  options.mode = mtpipe::decode_mode_from_string(o.mode);
  options.tagged = o.tagged;
  options.tag = o.tag;
  options.temperature = o.temperature;
  options.seed = o.seed;
  emit_records(mtpipe::bt_generate(mono, reverse, options, o.jobs), o);
}

void run_tel(const Opts& o) {
  std::string mono_lang = o.mono_lang.empty() ? o.src_lang : o.mono_lang;
  std::string output_lang = o.output_lang.empty() ? o.tgt_lang : o.output_lang;
  auto mono = mtpipe::read_mono(o.in, mono_lang);
  std::vector<std::unique_ptr<mtpipe::DictTranslator>> owned;
  std::vector<const mtpipe::Translator*> models;
  for (const auto& path : o.lexicons) {
    owned.push_back(std::make_unique<mtpipe::DictTranslator>(
        mtpipe::lexicon_from_file(path), output_lang));
    models.push_back(owned.back().get());
  }
  auto result = mtpipe::tel_build(mono, models, o.jobs);
  if (o.dedup_records) result = mtpipe::dedup(result);
  emit_records(result, o);
}

void run_hypo(const Opts& o) {
  std::string output_lang = o.output_lang.empty() ? o.tgt_lang : o.output_lang;
  auto base = load_translator(o.lexicon, output_lang);
  auto pairs = mtpipe::read_all_records(o.in, fmt(o), reader_opts(o));
  mtpipe::HypoOptions options;
  options.threshold = o.threshold;
  options.n = o.nbest;

  mtpipe::QualityFn qe = mtpipe::length_ratio_qe;
  if (!o.qe_scores.empty()) {
    auto lines = mtpipe::read_lines(o.qe_scores);
    std::map<size_t, double> by_index;
    for (const auto& line : lines) {
      if (line.empty()) continue;
      size_t tab = line.find('\t');
      if (tab == std::string::npos) {
        throw mtpipe::FormatError(o.qe_scores +
                                  ": expected index<TAB>score rows");
      }
      by_index[std::stoull(line.substr(0, tab))] =
          std::stod(line.substr(tab + 1));
    }
    for (size_t i = 0; i < pairs.size(); ++i) {
      auto it = by_index.find(i);
      if (it == by_index.end()) {
        throw mtpipe::FormatError(o.qe_scores + ": missing score for record " +
                                  std::to_string(i));
      }
      pairs[i].scores["qe"] = it->second;
    }
    qe = [](const mtpipe::SentencePair& pair) {
      return pair.scores.at("qe");
    };
  }

  auto records = mtpipe::hypo_build(pairs, base, qe, options, o.jobs);
  if (o.out.empty()) {
    for (const auto& record : records) std::cout << record.to_json().dump() << '\n';
  } else {
    mtpipe::write_ape_records(o.out, records);
  }
  if (!o.sft_out.empty()) {
    std::string tmpl = o.template_file.empty()
                           ? std::string(mtpipe::kDefaultApeTemplate)
                           : slurp(o.template_file);
    std::ofstream sft(o.sft_out, std::ios::binary);
    if (!sft) {
      throw mtpipe::IoError("cannot open file for writing: " + o.sft_out);
    }
    for (const auto& record : records) {
      sft << mtpipe::ape_sft_record(record, tmpl).dump() << '\n';
    }
    if (!sft) throw mtpipe::IoError("write failed: " + o.sft_out);
  }
}

void run_at_schedule(const Opts& o) {
  auto schedule = mtpipe::at_schedule(o.authentic, o.synthetic, o.rounds);
  if (o.out.empty()) {
    emit_doc(schedule.to_json(), "");
  } else {
    schedule.save(o.out);
  }
}

void run_curriculum_score(const Opts& o) {
  auto pairs = mtpipe::read_all_records(o.in, fmt(o), reader_opts(o));
  std::vector<mtpipe::DifficultyScore> scores;
  if (!o.scores_path.empty()) {
    auto external = mtpipe::load_external_scores(o.scores_path, pairs.size());
    scores.reserve(pairs.size());
    for (size_t i = 0; i < pairs.size(); ++i) {
      scores.push_back(mtpipe::difficulty_from_scores(
          external[i].first, external[i].second,
          static_cast<int64_t>(pairs[i].tgt.token_count())));
    }
  } else {
    if (o.in_lm.empty() || o.out_lm.empty()) {
      throw CLI::RequiredError("--in-lm and --out-lm (or --scores)");
    }
    std::string lm_lang = o.lm_lang.empty() ? o.tgt_lang : o.lm_lang;
    auto in_lm = mtpipe::NgramLm::train(mtpipe::read_mono(o.in_lm, lm_lang),
                                        o.order, o.k);
    auto out_lm = mtpipe::NgramLm::train(mtpipe::read_mono(o.out_lm, lm_lang),
                                         o.order, o.k);
    mtpipe::TargetLmScorer in_scorer(&in_lm), out_scorer(&out_lm);
    scores = mtpipe::domain_features(pairs, in_scorer, out_scorer, o.jobs);
  }
  for (size_t i = 0; i < pairs.size(); ++i) {
    pairs[i].scores["q"] = scores[i].q;
    pairs[i].scores["logprob_in"] = scores[i].logprob_in;
    pairs[i].scores["logprob_out"] = scores[i].logprob_out;
  }
  emit_records(pairs, o);
}

std::vector<mtpipe::DifficultyScore> scores_from_records(
    const std::vector<mtpipe::SentencePair>& pairs) {
  std::vector<mtpipe::DifficultyScore> scores;
  scores.reserve(pairs.size());
  for (size_t i = 0; i < pairs.size(); ++i) {
    auto in_it = pairs[i].scores.find("logprob_in");
    auto out_it = pairs[i].scores.find("logprob_out");
    if (in_it == pairs[i].scores.end() || out_it == pairs[i].scores.end()) {
      throw mtpipe::InputError("record " + std::to_string(i) +
                               " has no difficulty scores; run score first");
    }
    scores.push_back(mtpipe::difficulty_from_scores(
        in_it->second, out_it->second,
        static_cast<int64_t>(pairs[i].tgt.token_count())));
  }
  return scores;
}

void run_curriculum_bins(const Opts& o) {
  auto pairs = mtpipe::read_all_records(o.in, fmt(o), reader_opts(o));
  auto scores = scores_from_records(pairs);
  auto bins = mtpipe::build_bins(scores, o.num_bins);
  bins.schedule = mtpipe::default_schedule(o.num_bins, o.num_phases);
  if (o.out.empty()) {
    emit_doc(bins.to_json(), "");
  } else {
    bins.save(o.out);
  }
}

void run_curriculum_sample(const Opts& o) {
  auto bins = mtpipe::CurriculumBins::load(o.bins_path);
  auto pairs = mtpipe::read_all_records(o.in, fmt(o), reader_opts(o));
  auto scores = scores_from_records(pairs);
  mtpipe::SampleOptions options;
  options.phase = o.phase;
  options.batch_size = o.batch_size;
  options.num_batches = o.batches;
  options.epoch_coverage = o.epoch_coverage;
  options.seed = o.seed;
  auto sampled = mtpipe::cl_sample(bins, scores, options);
  std::vector<std::string> lines;
  lines.reserve(sampled.size());
  for (size_t b = 0; b < sampled.size(); ++b) {
    lines.push_back(json{{"batch", b}, {"records", sampled[b]}}.dump());
  }
  emit_lines(lines, o.out);
}

void run_bleu(const Opts& o) {
  auto hyp_lines = mtpipe::read_lines(o.hyp);
  auto ref_lines = mtpipe::read_lines(o.ref);
  auto tokenize_all = [&](const std::vector<std::string>& lines) {
    std::vector<std::vector<std::string>> out;
    out.reserve(lines.size());
    mtpipe::TokenizerKind kind = mtpipe::tokenizer_for_lang(
        o.lang.empty() ? o.tgt_lang : o.lang);
    for (const auto& line : lines) out.push_back(mtpipe::tokenize(line, kind));
    return out;
  };
  mtpipe::BleuSmoothing smoothing =
      mtpipe::bleu_smoothing_from_string(o.smoothing);
  auto result = mtpipe::bleu(tokenize_all(hyp_lines), tokenize_all(ref_lines),
                             o.max_n, smoothing);
  emit_doc(result.to_json(), o.out);
}

void run_stats(const Opts& o) {
  mtpipe::RecordReader reader(o.in, fmt(o), reader_opts(o));
  emit_doc(mtpipe::compute_stats(reader).to_json(), o.out);
}

void add_common(CLI::App* sub, Opts& o) {
  sub->add_option("--seed", o.seed, "Root random seed");
  sub->add_option("--format", o.format, "Record format")
      ->check(CLI::IsMember({"jsonl", "tsv"}));
  sub->add_option("--src-lang", o.src_lang, "Default source language");
  sub->add_option("--tgt-lang", o.tgt_lang, "Default target language");
  sub->set_config("--config", "", "Read default flag values from this file");
}

}  // namespace

int main(int argc, char** argv) {
  Opts o;
  CLI::App app{"corpus engineering toolkit for machine translation"};
  app.require_subcommand(1);

  // preprocess
  auto* pre = app.add_subcommand("preprocess", "Clean and filter a corpus");
  add_common(pre, o);
  pre->add_option("--in", o.in, "Input record file")->required();
  pre->add_option("--out", o.out, "Output record file (default stdout)");
  pre->add_option("--filters", o.filters_path, "Filter config (JSON array)");
  pre->add_option("--t2s", o.t2s_path, "Character mapping table");
  pre->add_option("--lid-sample", o.lid_samples,
                  "Language sample as lang=path (repeatable)");
  pre->add_option("--lid-order", o.lid_order, "LID n-gram order");
  pre->add_option("--lid-k", o.lid_k, "LID additive smoothing");
  pre->add_option("--align-iterations", o.align_iterations,
                  "EM iterations for the alignment filter");
  pre->add_option("--report", o.report_path, "Write filter report JSON here");
  pre->callback([&o] { run_preprocess(o); });

  // split-long
  auto* split = app.add_subcommand("split-long",
                                   "Split overlong sentences in a text file");
  add_common(split, o);
  split->add_option("--in", o.in, "Input text file")->required();
  split->add_option("--out", o.out, "Output text file (default stdout)");
  split->add_option("--lang", o.lang, "Language of the text");
  split->add_option("--max-len", o.max_len, "Maximum tokens per sentence")
      ->check(CLI::PositiveNumber);
  split->callback([&o] { run_split_long(o); });

  // bpe
  auto* bpe = app.add_subcommand("bpe", "Subword model operations");
  bpe->require_subcommand(1);
  auto* learn = bpe->add_subcommand("learn", "Learn merge operations");
  add_common(learn, o);
  learn->add_option("--in", o.inputs, "Input record files (repeatable)")
      ->required();
  learn->add_option("--merges", o.merges, "Number of merges")
      ->check(CLI::NonNegativeNumber);
  learn->add_option("--out", o.out, "Model output path")->required();
  learn->add_option("--protected", o.protected_tokens,
                    "Tokens kept whole (repeatable)");
  learn->callback([&o] { run_bpe_learn(o); });

  auto* apply = bpe->add_subcommand("apply", "Segment text with a model");
  add_common(apply, o);
  apply->add_option("--model", o.model, "Model path")->required();
  apply->add_option("--in", o.in, "Input file")->required();
  apply->add_flag("--mono", o.mono_mode, "Input is plain text, not records");
  apply->add_option("--lang", o.lang, "Language for --mono input");
  apply->add_option("--out", o.out, "Output for --mono (default stdout)");
  apply->add_option("--out-src", o.out_src, "Source-side output text file");
  apply->add_option("--out-tgt", o.out_tgt, "Target-side output text file");
  apply->add_option("--protected", o.protected_tokens,
                    "Tokens kept whole (repeatable)");
  apply->callback([&o] { run_bpe_apply(o); });

  auto* decode = bpe->add_subcommand("decode", "Undo subword segmentation");
  add_common(decode, o);
  decode->add_option("--in", o.in, "Input text file of subword tokens")
      ->required();
  decode->add_option("--out", o.out, "Output text file (default stdout)");
  decode->add_option("--lang", o.lang, "Language used to rejoin words");
  decode->callback([&o] { run_bpe_decode(o); });

  // augment
  auto* aug = app.add_subcommand("augment", "Synthetic data generation");
  aug->require_subcommand(1);

  auto* bit = aug->add_subcommand("bit", "Append direction-swapped copies");
  add_common(bit, o);
  bit->add_option("--in", o.in, "Input record file")->required();
  bit->add_option("--out", o.out, "Output record file (default stdout)");
  bit->callback([&o] { run_bit(o); });

  auto* dd = aug->add_subcommand("dd", "Distill both directions");
  add_common(dd, o);
  dd->add_option("--in", o.in, "Input record file")->required();
  dd->add_option("--fwd-lexicon", o.fwd_lexicon, "Forward model lexicon")
      ->required();
  dd->add_option("--bwd-lexicon", o.bwd_lexicon, "Backward model lexicon")
      ->required();
  dd->add_option("--fwd-lang", o.fwd_lang, "Forward output language");
  dd->add_option("--bwd-lang", o.bwd_lang, "Backward output language");
  dd->add_option("--jobs", o.jobs, "Worker threads")
      ->check(CLI::PositiveNumber);
  dd->add_flag("--dedup", o.dedup_records, "Drop duplicate output records");
  dd->add_option("--out", o.out, "Output record file (default stdout)");
  dd->callback([&o] { run_dd(o); });

  auto* ft = aug->add_subcommand("ft", "Forward-translate sampled mono text");
  add_common(ft, o);
  ft->add_option("--in", o.in, "Monolingual text file")->required();
  ft->add_option("--mono-lang", o.mono_lang, "Language of the mono text");
  ft->add_option("--lexicon", o.lexicon, "Teacher model lexicon")->required();
  ft->add_option("--output-lang", o.output_lang, "Translation language");
  ft->add_option("--sample-size", o.sample_size, "Sentences to sample")
      ->required();
  ft->add_option("--jobs", o.jobs, "Worker threads")
      ->check(CLI::PositiveNumber);
  ft->add_option("--out", o.out, "Output record file (default stdout)");
  ft->callback([&o] { run_ft(o); });

  auto* bt = aug->add_subcommand("bt", "Back-translate mono target text");
  add_common(bt, o);
  bt->add_option("--in", o.in, "Monolingual text file")->required();
  bt->add_option("--mono-lang", o.mono_lang, "Language of the mono text");
  bt->add_option("--lexicon", o.lexicon, "Reverse model lexicon")->required();
  bt->add_option("--output-lang", o.output_lang, "Translation language");
  bt->add_option("--mode", o.mode, "Decode mode")
      ->check(CLI::IsMember({"beam", "sampling"}));
  bt->add_flag("--tagged", o.tagged, "Prefix synthetic sources with a tag");
  bt->add_option("--tag", o.tag, "Tag token for --tagged");
  bt->add_option("--temperature", o.temperature, "Sampling temperature");
  bt->add_option("--jobs", o.jobs, "Worker threads")
      ->check(CLI::PositiveNumber);
  bt->add_option("--out", o.out, "Output record file (default stdout)");
  bt->callback([&o] { run_bt(o); });

  auto* tel = aug->add_subcommand("tel", "Ensemble-translate mono text");
  add_common(tel, o);
  tel->add_option("--in", o.in, "Monolingual text file")->required();
  tel->add_option("--mono-lang", o.mono_lang, "Language of the mono text");
  tel->add_option("--lexicon", o.lexicons, "Model lexicon (repeatable)")
      ->required();
  tel->add_option("--output-lang", o.output_lang, "Translation language");
  tel->add_option("--jobs", o.jobs, "Worker threads")
      ->check(CLI::PositiveNumber);
  tel->add_flag("--dedup", o.dedup_records, "Drop duplicate output records");
  tel->add_option("--out", o.out, "Output record file (default stdout)");
  tel->callback([&o] { run_tel(o); });

  auto* hypo = aug->add_subcommand("hypo", "Build hypothesis-repair records");
  add_common(hypo, o);
  hypo->add_option("--in", o.in, "Input record file")->required();
  hypo->add_option("--lexicon", o.lexicon, "Base model lexicon")->required();
  hypo->add_option("--output-lang", o.output_lang, "Translation language");
  hypo->add_option("--threshold", o.threshold, "Quality gate (strict)");
  hypo->add_option("--n", o.nbest, "Candidates per source")
      ->check(CLI::PositiveNumber);
  hypo->add_option("--qe-scores", o.qe_scores,
                   "External index<TAB>score quality file");
  hypo->add_option("--sft-out", o.sft_out, "Write prompt/completion JSONL");
  hypo->add_option("--template-file", o.template_file,
                   "Prompt template for --sft-out");
  hypo->add_option("--jobs", o.jobs, "Worker threads")
      ->check(CLI::PositiveNumber);
  hypo->add_option("--out", o.out, "Output JSONL (default stdout)");
  hypo->callback([&o] { run_hypo(o); });

  auto* sched = aug->add_subcommand("schedule", "Build an alternated-training schedule");
  add_common(sched, o);
  sched->add_option("--authentic", o.authentic, "Authentic dataset path")
      ->required();
  sched->add_option("--synthetic", o.synthetic,
                    "Synthetic dataset path (repeatable)");
  sched->add_option("--rounds", o.rounds, "Alternation rounds")
      ->check(CLI::PositiveNumber);
  sched->add_option("--out", o.out, "Schedule JSON path (default stdout)");
  sched->callback([&o] { run_at_schedule(o); });

  // curriculum
  auto* cur = app.add_subcommand("curriculum", "Difficulty-ordered sampling");
  cur->require_subcommand(1);

  auto* score = cur->add_subcommand("score", "Attach difficulty scores");
  add_common(score, o);
  score->add_option("--in", o.in, "Input record file")->required();
  score->add_option("--in-lm", o.in_lm, "In-domain text corpus");
  score->add_option("--out-lm", o.out_lm, "Out-domain text corpus");
  score->add_option("--lm-lang", o.lm_lang, "Language of the LM corpora");
  score->add_option("--order", o.order, "LM n-gram order")
      ->check(CLI::PositiveNumber);
  score->add_option("--k", o.k, "LM additive smoothing");
  score->add_option("--scores", o.scores_path,
                    "External index<TAB>in<TAB>out score file");
  score->add_option("--jobs", o.jobs, "Worker threads")
      ->check(CLI::PositiveNumber);
  score->add_option("--out", o.out, "Output record file (default stdout)");
  score->callback([&o] { run_curriculum_score(o); });

  auto* binsc = cur->add_subcommand("bins", "Bucket records by difficulty");
  add_common(binsc, o);
  binsc->add_option("--in", o.in, "Scored record file")->required();
  binsc->add_option("--bins", o.num_bins, "Number of buckets")
      ->check(CLI::PositiveNumber);
  binsc->add_option("--phases", o.num_phases, "Schedule phases")
      ->check(CLI::PositiveNumber);
  binsc->add_option("--out", o.out, "Bins JSON path (default stdout)");
  binsc->callback([&o] { run_curriculum_bins(o); });

  auto* sample = cur->add_subcommand("sample", "Draw curriculum batches");
  add_common(sample, o);
  sample->add_option("--bins", o.bins_path, "Bins JSON path")->required();
  sample->add_option("--in", o.in, "Scored record file")->required();
  sample->add_option("--phase", o.phase, "Schedule phase")
      ->check(CLI::NonNegativeNumber);
  sample->add_option("--batch-size", o.batch_size, "Records per batch")
      ->check(CLI::PositiveNumber);
  sample->add_option("--batches", o.batches, "Number of batches")
      ->check(CLI::NonNegativeNumber);
  sample->add_flag("--epoch-coverage", o.epoch_coverage,
                   "Cycle each bucket before repeating records");
  sample->add_option("--out", o.out, "Batch JSONL path (default stdout)");
  sample->callback([&o] { run_curriculum_sample(o); });

  // score
  auto* scorecmd = app.add_subcommand("score", "Evaluation metrics");
  scorecmd->require_subcommand(1);
  auto* bleucmd = scorecmd->add_subcommand("bleu", "Corpus BLEU");
  add_common(bleucmd, o);
  bleucmd->add_option("--hyp", o.hyp, "Hypothesis text file")->required();
  bleucmd->add_option("--ref", o.ref, "Reference text file")->required();
  bleucmd->add_option("--lang", o.lang, "Language used to tokenize");
  bleucmd->add_option("--max-n", o.max_n, "Longest n-gram order")
      ->check(CLI::PositiveNumber);
  bleucmd->add_option("--smoothing", o.smoothing, "Smoothing method")
      ->check(CLI::IsMember({"none", "add1"}));
  bleucmd->add_option("--out", o.out, "Result JSON path (default stdout)");
  bleucmd->callback([&o] { run_bleu(o); });

  // stats
  auto* stats = app.add_subcommand("stats", "Corpus statistics");
  add_common(stats, o);
  stats->add_option("--in", o.in, "Input record file")->required();
  stats->add_option("--out", o.out, "Stats JSON path (default stdout)");
  stats->callback([&o] { run_stats(o); });

  // run
  auto* run = app.add_subcommand("run", "Run a multi-stage pipeline");
  auto* run_seed =
      run->add_option("--seed", o.seed, "Override the config seed");
  run->add_option("--config", o.config_path, "Pipeline config JSON")
      ->required();
  run->add_option("--jobs", o.jobs, "Override config worker threads")
      ->check(CLI::PositiveNumber);
  run->add_option("--manifest", o.manifest_path, "Manifest output path");
  run->callback([&o, run_seed, run] {
    std::optional<uint64_t> seed_override;
    if (run_seed->count() > 0) seed_override = o.seed;
    int jobs_override = run->count("--jobs") > 0 ? o.jobs : 0;
    auto manifest = mtpipe::run_pipeline(o.config_path, jobs_override,
                                         o.manifest_path, seed_override);
    std::cout << manifest.to_json().dump(2) << '\n';
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const mtpipe::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
