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

#include "xkws/pipeline.hpp"

#include <cstdio>
#include <fmt/format.h>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "xkws/binary_io.hpp"
#include "xkws/errors.hpp"
#include "xkws/log.hpp"
#include "xkws/parallel.hpp"
#include "xkws/simd/kernels.hpp"
#include "xkws/text.hpp"

namespace xkws {

namespace fs = std::filesystem;

std::size_t RunConfig::resolved_input_frames() const {
  if (input_frames != 0) return input_frames;
  if (uses_synthetic())
    return std::max(synthetic_config.max_utterance_frames(),
                    arch.min_input_frames());
  return 800;
}

std::string RunConfig::resolved_stemmer() const {
  if (stemmer != "auto") return stemmer;
  return uses_synthetic() ? "identity" : "german";
}

void RunConfig::validate() const {
  if (!manifest.empty() && synthetic)
    throw ValidationError(
        "choose one corpus source: manifest or synthetic, not both");
  if (manifest.empty() &&
      (!tags_path.empty() || !vocab_path.empty() || !lexicon_path.empty()))
    throw ValidationError(
        "tags_path, vocab_path and lexicon_path need a manifest");
  if (!manifest.empty() && vocab_path.empty())
    throw ValidationError("a manifest corpus needs vocab_path");
  if (uses_synthetic()) synthetic_config.validate();
  features.validate();
  train.validate();
  make_stemmer(resolved_stemmer());
  if (eval_k == 0) throw ValidationError("eval_k must be >= 1");
  if (keywords.empty() && num_keywords == 0)
    throw ValidationError("num_keywords must be >= 1");
  if (out_dir.empty()) throw ValidationError("out_dir must not be empty");
  if (resolved_input_frames() < arch.min_input_frames())
    throw LengthError("input_frames " + std::to_string(resolved_input_frames()) +
                      " is below the network minimum of " +
                      std::to_string(arch.min_input_frames()));
  if (isa != "auto") simd::parse_isa(isa);
}

nlohmann::ordered_json RunConfig::to_json() const {
  nlohmann::ordered_json j;
  j["manifest"] = manifest;
  j["synthetic"] = uses_synthetic();
  j["tags_path"] = tags_path;
  j["vocab_path"] = vocab_path;
  j["lexicon_path"] = lexicon_path;
  const auto& s = synthetic_config;
  j["num_search_words"] = s.num_search_words;
  j["num_query_words"] = s.num_query_words;
  j["vocab_size"] = s.vocab_size;
  j["train_utterances"] = s.train_utterances;
  j["dev_utterances"] = s.dev_utterances;
  j["test_utterances"] = s.test_utterances;
  j["words_per_utterance_min"] = s.words_per_utterance.min;
  j["words_per_utterance_max"] = s.words_per_utterance.max;
  j["frames_per_word_min"] = s.frames_per_word.min;
  j["frames_per_word_max"] = s.frames_per_word.max;
  j["segment_frames"] = s.segment_frames;
  j["num_phones"] = s.num_phones;
  j["template_noise_std"] = s.template_noise_std;
  j["tagger_hit_prob"] = s.tagger_hit_prob;
  j["tagger_p_hi"] = s.tagger_p_hi;
  j["tagger_p_lo"] = s.tagger_p_lo;
  j["tag_noise_std"] = s.tag_noise_std;
  j["sample_rate"] = features.sample_rate;
  j["window_length"] = features.window_length;
  j["hop_length"] = features.hop_length;
  j["num_mel_filters"] = features.num_mel_filters;
  j["pre_emphasis"] = features.pre_emphasis;
  j["delta_window"] = features.delta_window;
  j["learning_rate"] = train.learning_rate;
  j["batch_size"] = train.batch_size;
  j["epochs"] = train.max_epochs;
  j["patience"] = train.patience;
  j["beta1"] = train.beta1;
  j["beta2"] = train.beta2;
  j["epsilon"] = train.epsilon;
  j["threads"] = train.threads;
  j["conv1_filters"] = arch.conv[0].filters;
  j["conv2_filters"] = arch.conv[1].filters;
  j["conv3_filters"] = arch.conv[2].filters;
  j["hidden_units"] = arch.hidden_units;
  j["keywords"] = keywords;
  j["num_keywords"] = num_keywords;
  j["min_occurrences"] = min_occurrences;
  j["stemmer"] = resolved_stemmer();
  j["input_frames"] = resolved_input_frames();
  j["eval_k"] = eval_k;
  j["pooled_eer"] = pooled_eer;
  j["rankings_depth"] = rankings_depth;
  j["seed"] = seed;
  j["out_dir"] = out_dir;
  j["isa"] = isa;
  return j;
}

std::string RunConfig::hash() const {
  auto j = to_json();
  for (const char* key : {"out_dir", "threads", "isa", "rankings_depth"})
    j.erase(key);
  return hex64(fnv1a64(j.dump()));
}

FrameMatrix Experiment::frames(const UtteranceRecord& record) const {
  return load_frames(record, config.features);
}

ReferenceMap Experiment::references(Split split) const {
  ReferenceMap out;
  for (const auto* r : corpus.split(split))
    if (r->reference_translation) out.emplace(r->id, *r->reference_translation);
  return out;
}

std::vector<SearchItem> Experiment::search_items(Split split,
                                                 bool with_frames) const {
  std::vector<SearchItem> items;
  for (const auto* r : corpus.split(split)) {
    SearchItem item{r->id, {}};
    if (with_frames) item.frames = frames(*r);
    items.push_back(std::move(item));
  }
  return items;
}

VariantData Experiment::variant_data() const {
  VariantData d;
  d.corpus = &corpus;
  d.vocab = &vocab;
  d.lexicon = lexicon ? &*lexicon : nullptr;
  d.soft_tags = &soft_tags;
  d.keywords = keywords;
  d.stemmer = stemmer;
  return d;
}

Experiment load_experiment(const RunConfig& config) {
  config.validate();
  Experiment e;
  e.config = config;
  e.stemmer = make_stemmer(config.resolved_stemmer());
  e.input_frames = config.resolved_input_frames();
  if (config.uses_synthetic()) {
    SyntheticConfig sc = config.synthetic_config;
    sc.seed = mix_seed(config.seed, "corpus");
    SyntheticCorpus s = generate_synthetic(sc);
    e.corpus = std::move(s.corpus);
    e.vocab = std::move(s.vocabulary);
    e.lexicon = std::move(s.lexicon);
    e.soft_tags = std::move(s.true_tags);
  } else {
    e.corpus = load_manifest(config.manifest);
    e.vocab = read_vocabulary(config.vocab_path);
    if (!config.tags_path.empty())
      e.soft_tags = load_tag_vectors(config.tags_path, e.vocab);
    if (!config.lexicon_path.empty())
      e.lexicon = read_lexicon(config.lexicon_path);
  }
  if (e.corpus.split(Split::kTest).empty())
    log_warning("the corpus has no test utterances");

  if (!config.keywords.empty()) {
    for (const auto& k : config.keywords)
      if (!e.vocab.contains(k))
        throw ValidationError("keyword '" + k + "' is not in the vocabulary");
    e.keywords = config.keywords;
  } else {
    std::vector<std::vector<std::string>> refs;
    for (const auto& [id, tokens] : e.references(Split::kTest))
      refs.push_back(tokens);
    e.keywords = select_keywords(e.vocab, refs, config.num_keywords,
                                 config.min_occurrences,
                                 mix_seed(config.seed, "keywords"), e.stemmer);
  }
  return e;
}

void write_text_file(const fs::path& path, std::string_view text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error("failed writing " + path.string());
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

void write_config_sidecar(const fs::path& path, const RunConfig& config,
                          nlohmann::ordered_json extra = {}) {
  nlohmann::ordered_json j;
  j["config_hash"] = config.hash();
  for (auto& [k, v] : extra.items()) j[k] = v;
  j["config"] = config.to_json();
  write_text_file(path, j.dump(2) + "\n");
}

std::string feature_hash(const FeatureConfig& f) {
  return hex64(fnv1a64(fmt::format(
      "{}|{}|{}|{}|{}|{}|{}|{}", f.sample_rate, f.window_length, f.hop_length,
      f.num_mel_filters, f.num_cepstra, f.pre_emphasis, f.log_floor,
      f.delta_window)));
}

fs::path model_dir(const RunConfig& config, ScorerKind kind) {
  return fs::path(config.out_dir) / "models" / std::string(scorer_kind_name(kind));
}

}  // namespace

fs::path generate_corpus(const RunConfig& config) {
  if (!config.uses_synthetic())
    throw ValidationError("generate needs a synthetic corpus configuration");
  const Experiment e = load_experiment(config);
  const fs::path dir = fs::path(config.out_dir) / "corpus";
  fs::create_directories(dir / "frames");
  write_manifest(dir / "manifest.jsonl", e.corpus, dir / "frames");
  write_lexicon(dir / "lexicon.json", *e.lexicon);
  write_vocabulary(dir / "vocab.txt", e.vocab);
  write_tag_vectors(dir / "tags.kwsf", e.soft_tags);
  write_config_sidecar(dir / "config.json", config);
  return dir;
}

TrainOutcome train_model(const RunConfig& config, ScorerKind kind) {
  if (!is_trainable(kind))
    throw ValidationError(std::string(scorer_kind_name(kind)) +
                          " needs no training");
  const Experiment e = load_experiment(config);
  const fs::path dir = model_dir(config, kind);
  fs::create_directories(dir);

  TrainConfig tc = config.train;
  tc.seed = mix_seed(config.seed, "shuffle");
  const auto name = scorer_kind_name(kind);
  const auto on_epoch = [&](const EpochRecord& r, bool improved,
                            const NetworkParams<float>&) {
    log_info(fmt::format("{} epoch {}: train loss {:.4f}, dev loss {:.4f}{} "
                         "({:.1f}s)",
                         name, r.epoch, r.train_loss, r.dev_loss,
                         improved ? " *" : "", r.seconds));
  };
  TrainedVariant v = train_variant(
      kind, e.variant_data(),
      [&](const UtteranceRecord& r) { return e.frames(r); }, tc, config.arch,
      e.input_frames, mix_seed(config.seed, "init"), on_epoch);

  TrainOutcome out;
  out.checkpoint = dir / "model.kwsm";
  write_checkpoint(out.checkpoint, v.params);
  CheckpointMeta meta;
  meta.model = std::string(name);
  meta.output_words = v.output_words;
  meta.vocab_hash = hex64(e.vocab.hash());
  meta.feature_hash = feature_hash(config.features);
  meta.config_hash = config.hash();
  meta.seed = config.seed;
  meta.feature_mean = v.stats.mean;
  meta.feature_stddev = v.stats.stddev;
  meta.input_frames = v.input_frames;
  meta.best_epoch = v.history.best_epoch;
  meta.pool_width = config.arch.pool_width;
  write_checkpoint_meta(meta_path(out.checkpoint), meta);
  write_text_file(dir / "history.csv", v.history.to_csv());
  out.history = std::move(v.history);
  return out;
}

std::unique_ptr<Scorer> load_scorer(const Experiment& e,
                                    const std::string& model) {
  fs::path path;
  bool is_kind = true;
  ScorerKind kind{};
  try {
    kind = parse_scorer_kind(model);
  } catch (const ValidationError&) {
    is_kind = false;
  }
  if (is_kind) {
    if (kind == ScorerKind::kDeTextPrior) {
      std::vector<std::vector<std::string>> refs;
      for (const auto& [id, tokens] : e.references(Split::kTrain))
        refs.push_back(tokens);
      return std::make_unique<PriorScorer>(refs, e.vocab,
                                           RelevanceJudge(e.stemmer));
    }
    if (kind == ScorerKind::kDeVisionCnn)
      return std::make_unique<VisionScorer>(e.soft_tags, e.vocab.words());
    path = model_dir(e.config, kind) / "model.kwsm";
    if (!fs::exists(path))
      throw Error("no checkpoint at " + path.string() + "; run `xkws train --model " +
                  model + "` first");
  } else {
    path = model;
    if (!fs::exists(path))
      throw ValidationError("'" + model +
                            "' is neither a model kind nor a checkpoint file");
  }
  const CheckpointMeta meta = read_checkpoint_meta(meta_path(path));
  if (meta.config_hash != e.config.hash())
    throw ValidationError("checkpoint " + path.string() +
                          " was trained under config " + meta.config_hash +
                          " but the current config is " + e.config.hash());
  if (meta.vocab_hash != hex64(e.vocab.hash()))
    throw ValidationError("checkpoint " + path.string() +
                          " was trained with a different vocabulary");
  NetworkParams<float> params = read_checkpoint(path, meta.pool_width);
  FeatureStats stats{meta.feature_mean, meta.feature_stddev};
  return std::make_unique<NetworkScorer>(parse_scorer_kind(meta.model),
                                         std::move(params), meta.output_words,
                                         std::move(stats), meta.input_frames);
}

namespace {

std::string eval_name(const std::string& model, Split split) {
  std::string name = model;
  bool is_kind = true;
  try {
    parse_scorer_kind(model);
  } catch (const ValidationError&) {
    is_kind = false;
  }
  if (!is_kind) {
    const fs::path p(model);
    name = read_checkpoint_meta(meta_path(p)).model + "-" + p.stem().string();
  }
  if (split != Split::kTest) name += "_" + std::string(split_name(split));
  return name;
}

ScoreMatrix score_split(const Experiment& e, const Scorer& scorer, Split split) {
  const bool needs_frames = dynamic_cast<const NetworkScorer*>(&scorer) != nullptr;
  const auto items = e.search_items(split, needs_frames);
  const std::size_t threads =
      e.config.train.threads ? e.config.train.threads : default_thread_count();
  return score_collection(scorer, items, threads);
}

}  // namespace

EvalOutcome evaluate_model(const RunConfig& config, const std::string& model,
                           Split split) {
  const Experiment e = load_experiment(config);
  const auto scorer = load_scorer(e, model);
  const ScoreMatrix scores = score_split(e, *scorer, split);
  const ReferenceMap refs = e.references(split);
  const RelevanceJudge judge(e.stemmer);
  EvalOutcome out;
  out.report = evaluate(scores, refs, e.keywords, judge,
                        {config.eval_k, config.pooled_eer});
  out.dir = fs::path(config.out_dir) / "eval" / eval_name(model, split);
  fs::create_directories(out.dir);
  write_text_file(out.dir / "metrics.csv", out.report.to_csv());
  write_text_file(out.dir / "metrics.json", out.report.to_json());
  write_text_file(out.dir / "pr_curve.csv", out.report.pr_curve_csv());
  write_text_file(out.dir / "rankings.csv",
                  rankings_csv(scores, refs, e.keywords, judge,
                               config.rankings_depth));
  write_config_sidecar(out.dir / "config.json", config,
                       {{"model", scorer->name()},
                        {"split", split_name(split)},
                        {"keywords", e.keywords}});
  return out;
}

std::vector<SearchHit> search(const RunConfig& config, const std::string& model,
                              const std::string& keyword, std::size_t top,
                              Split split) {
  if (top == 0) throw ValidationError("--top must be >= 1");
  const Experiment e = load_experiment(config);
  const auto scorer = load_scorer(e, model);
  const ScoreMatrix scores = score_split(e, *scorer, split);
  const ReferenceMap refs = e.references(split);
  const RelevanceJudge judge(e.stemmer);
  const auto ranking = rank(scores, keyword);
  const std::size_t c = scores.column(keyword);
  std::vector<SearchHit> hits;
  for (std::size_t i = 0; i < std::min(top, ranking.size()); ++i) {
    SearchHit h;
    h.rank = i + 1;
    h.id = ranking[i];
    const auto row = static_cast<std::size_t>(
        std::lower_bound(scores.ids.begin(), scores.ids.end(), h.id) -
        scores.ids.begin());
    h.score = scores.scores(row, c);
    if (auto it = refs.find(h.id); it != refs.end()) {
      h.reference = it->second;
      h.relevant = judge.relevant(it->second, keyword);
    }
    hits.push_back(std::move(h));
  }
  return hits;
}

fs::path write_report(const RunConfig& config,
                      const std::vector<std::string>& models,
                      std::string* table) {
  if (models.empty()) throw ValidationError("report needs at least one model");
  const fs::path eval_dir = fs::path(config.out_dir) / "eval";
  std::string hash;
  std::string csv = fmt::format("model,p_at_{},p_at_n,eer,ap\n", config.eval_k);
  std::string text = fmt::format("{:<28}{:>8}{:>8}{:>8}{:>8}\n", "model",
                                 fmt::format("P@{}", config.eval_k), "P@N",
                                 "EER", "AP");
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& model : models) {
    const fs::path dir = eval_dir / model;
    nlohmann::json side, metrics;
    try {
      side = nlohmann::json::parse(read_text_file(dir / "config.json"));
      metrics = nlohmann::json::parse(read_text_file(dir / "metrics.json"));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(dir.string() + ": " + e.what());
    } catch (const Error&) {
      throw Error("no evaluation for '" + model + "' in " + eval_dir.string() +
                  "; run `xkws evaluate --model " + model + "` first");
    }
    const auto h = side.at("config_hash").get<std::string>();
    if (hash.empty()) hash = h;
    if (h != hash)
      throw ValidationError("refusing to mix runs: '" + model +
                            "' has config hash " + h + ", expected " + hash);
    const double pk = metrics.at("macro").at("p_at_k").get<double>();
    const double pn = metrics.at("macro").at("p_at_n").get<double>();
    const auto& eer_j = metrics.at("macro").at("eer");
    const double ap = metrics.at("pooled").at("ap").get<double>();
    const std::string eer_csv =
        eer_j.is_null() ? "" : fmt::format("{:.6f}", eer_j.get<double>());
    const std::string eer_txt =
        eer_j.is_null() ? "-" : fmt::format("{:.1f}", 100 * eer_j.get<double>());
    csv += fmt::format("{},{:.6f},{:.6f},{},{:.6f}\n", model, pk, pn, eer_csv, ap);
    text += fmt::format("{:<28}{:>8.1f}{:>8.1f}{:>8}{:>8.1f}\n", model, 100 * pk,
                        100 * pn, eer_txt, 100 * ap);
    rows.push_back({{"model", model}, {"metrics", metrics}});
  }
  const fs::path out = fs::path(config.out_dir) / "report.csv";
  write_text_file(out, csv);
  nlohmann::ordered_json side;
  side["config_hash"] = hash;
  side["models"] = rows;
  write_text_file(fs::path(config.out_dir) / "report.json", side.dump(2) + "\n");
  if (table) *table = text;
  return out;
}

DirLock::DirLock(const fs::path& dir) : path_(dir / ".xkws.lock") {
  fs::create_directories(dir);
  std::FILE* f = std::fopen(path_.c_str(), "wx");
  if (!f)
    throw Error("output directory " + dir.string() +
                " is in use by another run (remove " + path_.string() +
                " if that run is gone)");
  std::fprintf(f, "%ld\n", static_cast<long>(::getpid()));
  std::fclose(f);
}

DirLock::~DirLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

}  // namespace xkws
