// Copyright 2026 The xkws Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "xkws/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cstdlib>
#include <fmt/format.h>
#include <ostream>

#include "xkws/errors.hpp"
#include "xkws/pipeline.hpp"
#include "xkws/simd/kernels.hpp"

namespace xkws {

namespace fs = std::filesystem;

namespace {

struct CommandArgs {
  std::string model;
  std::string split = "test";
  std::string keyword;
  std::size_t top = 10;
  std::vector<std::string> models;
};

void add_config_options(CLI::App& app, RunConfig& c) {
  const auto group = [&](const char* name) { return app.add_option_group(name); };

  auto* corpus = group("Corpus");
  corpus->add_option("--manifest", c.manifest, "JSON-lines manifest");
  corpus->add_flag("--synthetic", c.synthetic, "Use the synthetic generator");
  corpus->add_option("--tags_path", c.tags_path, "Tag vectors (KWSF)");
  corpus->add_option("--vocab_path", c.vocab_path, "Tagger vocabulary");
  corpus->add_option("--lexicon_path", c.lexicon_path, "Translation lexicon");

  auto& s = c.synthetic_config;
  auto* syn = group("Synthetic corpus");
  syn->add_option("--num_search_words", s.num_search_words)->capture_default_str();
  syn->add_option("--num_query_words", s.num_query_words)->capture_default_str();
  syn->add_option("--vocab_size", s.vocab_size)->capture_default_str();
  syn->add_option("--train_utterances", s.train_utterances)->capture_default_str();
  syn->add_option("--dev_utterances", s.dev_utterances)->capture_default_str();
  syn->add_option("--test_utterances", s.test_utterances)->capture_default_str();
  syn->add_option("--words_per_utterance_min", s.words_per_utterance.min)
      ->capture_default_str();
  syn->add_option("--words_per_utterance_max", s.words_per_utterance.max)
      ->capture_default_str();
  syn->add_option("--frames_per_word_min", s.frames_per_word.min)
      ->capture_default_str();
  syn->add_option("--frames_per_word_max", s.frames_per_word.max)
      ->capture_default_str();
  syn->add_option("--segment_frames", s.segment_frames)->capture_default_str();
  syn->add_option("--num_phones", s.num_phones)->capture_default_str();
  syn->add_option("--template_noise_std", s.template_noise_std)->capture_default_str();
  syn->add_option("--tagger_hit_prob", s.tagger_hit_prob)->capture_default_str();
  syn->add_option("--tagger_p_hi", s.tagger_p_hi)->capture_default_str();
  syn->add_option("--tagger_p_lo", s.tagger_p_lo)->capture_default_str();
  syn->add_option("--tag_noise_std", s.tag_noise_std)->capture_default_str();

  auto& f = c.features;
  auto* feat = group("Features");
  feat->add_option("--sample_rate", f.sample_rate)->capture_default_str();
  feat->add_option("--window_length", f.window_length)->capture_default_str();
  feat->add_option("--hop_length", f.hop_length)->capture_default_str();
  feat->add_option("--num_mel_filters", f.num_mel_filters)->capture_default_str();
  feat->add_option("--pre_emphasis", f.pre_emphasis)->capture_default_str();
  feat->add_option("--delta_window", f.delta_window)->capture_default_str();

  auto& t = c.train;
  auto* tr = group("Training");
  tr->add_option("--learning_rate", t.learning_rate)->capture_default_str();
  tr->add_option("--batch_size", t.batch_size)->capture_default_str();
  tr->add_option("--epochs", t.max_epochs)->capture_default_str();
  tr->add_option("--patience", t.patience)->capture_default_str();
  tr->add_option("--beta1", t.beta1)->capture_default_str();
  tr->add_option("--beta2", t.beta2)->capture_default_str();
  tr->add_option("--epsilon", t.epsilon)->capture_default_str();
  tr->add_option("--threads", t.threads, "0 uses every hardware thread")
      ->capture_default_str();
  tr->add_option("--conv1_filters", c.arch.conv[0].filters)->capture_default_str();
  tr->add_option("--conv2_filters", c.arch.conv[1].filters)->capture_default_str();
  tr->add_option("--conv3_filters", c.arch.conv[2].filters)->capture_default_str();
  tr->add_option("--hidden_units", c.arch.hidden_units)->capture_default_str();
  tr->add_option("--input_frames", c.input_frames,
                 "Network input length; 0 picks one from the corpus")
      ->capture_default_str();

  auto* ev = group("Evaluation");
  ev->add_option("--keywords", c.keywords, "Comma-separated keyword list")
      ->delimiter(',');
  ev->add_option("--num_keywords", c.num_keywords)->capture_default_str();
  ev->add_option("--min_occurrences", c.min_occurrences)->capture_default_str();
  ev->add_option("--stemmer", c.stemmer, "auto, identity or german")
      ->capture_default_str();
  ev->add_option("--eval_k", c.eval_k, "Depth of P@k")->capture_default_str();
  ev->add_flag("--pooled_eer", c.pooled_eer, "Also report pooled EER");
  ev->add_option("--rankings_depth", c.rankings_depth)->capture_default_str();

  auto* run = group("Run");
  run->add_option("--seed", c.seed)->capture_default_str();
  run->add_option("--out_dir", c.out_dir,
                  "Output directory (XKWS_OUT_DIR overrides the config file)")
      ->capture_default_str();
  run->add_option("--isa", c.isa, "auto, scalar, avx2 or neon")
      ->capture_default_str();
}

void add_command_options(CLI::App& app, CommandArgs& a) {
  auto* g = app.add_option_group("Command");
  g->add_option("--model", a.model,
                "Model kind or checkpoint path (train, evaluate, search)");
  g->add_option("--split", a.split, "Split to score: test or dev")
      ->capture_default_str();
  g->add_option("--keyword", a.keyword, "Query keyword (search)");
  g->add_option("--top", a.top, "Rows to print (search)")->capture_default_str();
  g->add_option("--models", a.models, "Evaluated models to compare (report)")
      ->delimiter(',');
}

bool given_on_command_line(const std::vector<std::string>& args,
                           std::string_view flag) {
  return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
    return a == flag || a.rfind(std::string(flag) + "=", 0) == 0;
  });
}

std::vector<std::string> evaluated_models(const RunConfig& c) {
  std::vector<std::string> out;
  const fs::path dir = fs::path(c.out_dir) / "eval";
  if (fs::is_directory(dir))
    for (const auto& e : fs::directory_iterator(dir))
      if (fs::exists(e.path() / "metrics.json"))
        out.push_back(e.path().filename().string());
  std::sort(out.begin(), out.end());
  return out;
}

fs::path featurize(const RunConfig& c) {
  if (c.manifest.empty())
    throw ValidationError("featurize needs a manifest with wav_path records");
  const Corpus corpus = load_manifest(c.manifest);
  const fs::path dir = fs::absolute(fs::path(c.out_dir) / "features");
  fs::create_directories(dir / "frames");
  std::vector<UtteranceRecord> records;
  for (const auto& r : corpus.records()) {
    UtteranceRecord copy = r;
    const auto absolute_path = [](fs::path& p) { p = fs::absolute(p); };
    if (std::holds_alternative<WaveFile>(r.frames)) {
      copy.frames = load_frames(r, c.features);
    } else if (auto* ff = std::get_if<FramesFile>(&copy.frames)) {
      absolute_path(ff->path);
    }
    if (auto* tf = std::get_if<TagFile>(&copy.tag_source)) absolute_path(tf->path);
    records.push_back(std::move(copy));
  }
  const fs::path manifest = dir / "manifest.jsonl";
  write_manifest(manifest, Corpus(std::move(records)), dir / "frames");
  return manifest;
}

int dispatch(const std::string& command, const RunConfig& config,
             const CommandArgs& a, std::ostream& out) {
  if (command == "search") {
    const auto model = a.model.empty() ? "x_vision_speech_cnn" : a.model;
    if (a.keyword.empty()) throw ValidationError("search needs --keyword");
    const auto hits = search(config, model, a.keyword, a.top, parse_split(a.split));
    out << fmt::format("{:>4}  {:>8}  {:<14}  {:>3}  {}\n", "rank", "score", "id",
                       "rel", "reference");
    for (const auto& h : hits) {
      std::string ref;
      for (const auto& t : h.reference) ref += (ref.empty() ? "" : " ") + t;
      out << fmt::format("{:>4}  {:>8.4f}  {:<14}  {:>3}  {}\n", h.rank, h.score,
                         h.id, h.relevant ? "*" : "", ref);
    }
    return 0;
  }

  DirLock lock(config.out_dir);
  if (command == "generate") {
    out << "wrote " << generate_corpus(config).string() << "\n";
  } else if (command == "featurize") {
    out << "wrote " << featurize(config).string() << "\n";
  } else if (command == "train") {
    const auto model = a.model.empty() ? "x_vision_speech_cnn" : a.model;
    const auto result = train_model(config, parse_scorer_kind(model));
    out << fmt::format("wrote {} (best epoch {} of {})\n",
                       result.checkpoint.string(), result.history.best_epoch,
                       result.history.epochs.size());
  } else if (command == "evaluate") {
    const auto model = a.model.empty() ? "x_vision_speech_cnn" : a.model;
    const auto result = evaluate_model(config, model, parse_split(a.split));
    const auto& r = result.report;
    out << fmt::format(
        "{}: P@{} {:.3f}  P@N {:.3f}  EER {}  AP {:.3f}\nwrote {}\n", r.scorer,
        r.k, r.p_at_k, r.p_at_n, r.eer ? fmt::format("{:.3f}", *r.eer) : "-",
        r.ap, result.dir.string());
  } else if (command == "report") {
    auto models = a.models.empty() ? evaluated_models(config) : a.models;
    std::string table;
    const auto path = write_report(config, models, &table);
    out << table << "wrote " << path.string() << "\n";
  }
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Cross-lingual keyword spotting with visually grounded speech "
               "models.",
               "xkws"};
  app.set_config("--config", "", "Key-value config file");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1, 1);
  RunConfig config;
  CommandArgs command_args;
  add_config_options(app, config);
  add_command_options(app, command_args);
  const std::pair<const char*, const char*> commands[] = {
      {"generate", "Write the synthetic corpus"},
      {"featurize", "Compute MFCC frames for waveform records"},
      {"train", "Train a speech model (--model <kind>)"},
      {"evaluate", "Score a split and write metrics (--model <kind|checkpoint>)"},
      {"search", "Rank utterances for one keyword (--keyword <w> --top <k>)"},
      {"report", "Compare evaluated models side by side (--models a,b,c)"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return 0;
    }
    err << "xkws: " << e.what() << "\nRun 'xkws --help' for usage.\n";
    return 2;
  }

  try {
    if (!given_on_command_line(args, "--out_dir"))
      if (const char* env = std::getenv("XKWS_OUT_DIR"); env && *env)
        config.out_dir = env;
    config.validate();
    simd::set_active_isa(config.isa == "auto" ? simd::best_isa()
                                              : simd::parse_isa(config.isa));
    return dispatch(app.get_subcommands().front()->get_name(), config,
                    command_args, out);
  } catch (const std::exception& e) {
    err << "xkws: error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace xkws
