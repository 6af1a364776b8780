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

#pragma once

#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "xkws/baselines.hpp"
#include "xkws/checkpoint.hpp"
#include "xkws/corpus.hpp"
#include "xkws/features.hpp"
#include "xkws/lexicon.hpp"
#include "xkws/network.hpp"
#include "xkws/spotting.hpp"
#include "xkws/targets.hpp"
#include "xkws/trainer.hpp"

namespace xkws {

// Everything a command needs. Config file keys and flags use the field
// names below.
struct RunConfig {
  // Corpus source: a manifest, or the synthetic generator.
  std::string manifest;
  bool synthetic = false;  // implied when manifest is empty
  std::string tags_path;   // KWSF tag vectors with a row index sidecar
  std::string vocab_path;
  std::string lexicon_path;

  SyntheticConfig synthetic_config;
  FeatureConfig features;
  TrainConfig train;
  Architecture arch;

  std::vector<std::string> keywords;  // empty: draw num_keywords at random
  std::size_t num_keywords = 10;
  std::size_t min_occurrences = 1;
  std::string stemmer = "auto";  // identity for synthetic, german otherwise
  std::size_t input_frames = 0;  // 0: longest synthetic utterance, else 800
  std::size_t eval_k = 10;  // depth of P@k
  bool pooled_eer = false;
  std::size_t rankings_depth = 10;

  std::uint64_t seed = 1;
  std::string out_dir = "out";
  std::string isa = "auto";

  bool uses_synthetic() const { return manifest.empty(); }
  std::size_t resolved_input_frames() const;
  std::string resolved_stemmer() const;
  void validate() const;

  // Every field, in a fixed order.
  nlohmann::ordered_json to_json() const;
  // Hash of the fields that affect results (not out_dir, threads or isa).
  std::string hash() const;
};

// Corpus, vocabulary, tags and keywords resolved from a RunConfig.
struct Experiment {
  RunConfig config;
  Corpus corpus;
  Vocabulary vocab;
  std::optional<TranslationLexicon> lexicon;
  TargetMap soft_tags;
  Stemmer stemmer;
  std::vector<std::string> keywords;
  std::size_t input_frames = 0;

  FrameMatrix frames(const UtteranceRecord& record) const;
  ReferenceMap references(Split split) const;
  std::vector<SearchItem> search_items(Split split, bool with_frames) const;
  VariantData variant_data() const;
};

Experiment load_experiment(const RunConfig& config);

// Writes corpus/{manifest.jsonl, frames/, lexicon.json, vocab.txt,
// tags.kwsf, config.json} under out_dir. Synthetic mode only.
std::filesystem::path generate_corpus(const RunConfig& config);

struct TrainOutcome {
  std::filesystem::path checkpoint;
  TrainHistory history;
};

// Trains one speech variant into out_dir/models/<kind>/.
TrainOutcome train_model(const RunConfig& config, ScorerKind kind);

// A scorer by kind name (trained models are read from out_dir/models) or by
// checkpoint path.
std::unique_ptr<Scorer> load_scorer(const Experiment& experiment,
                                    const std::string& model);

struct EvalOutcome {
  std::filesystem::path dir;
  MetricsReport report;
};

// Scores the split and writes out_dir/eval/<name>[_<split>]/.
EvalOutcome evaluate_model(const RunConfig& config, const std::string& model,
                           Split split = Split::kTest);

struct SearchHit {
  std::size_t rank = 0;
  std::string id;
  double score = 0;
  bool relevant = false;
  std::vector<std::string> reference;
};

std::vector<SearchHit> search(const RunConfig& config, const std::string& model,
                              const std::string& keyword, std::size_t top,
                              Split split = Split::kTest);

// Collects eval/<model>/metrics.json for each model into report.csv; throws
// when their config hashes differ.
std::filesystem::path write_report(const RunConfig& config,
                                   const std::vector<std::string>& models,
                                   std::string* table = nullptr);

// Exclusive lock on an output directory, released on destruction.
class DirLock {
 public:
  explicit DirLock(const std::filesystem::path& dir);
  ~DirLock();
  DirLock(const DirLock&) = delete;
  DirLock& operator=(const DirLock&) = delete;

 private:
  std::filesystem::path path_;
};

void write_text_file(const std::filesystem::path& path, std::string_view text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace xkws
