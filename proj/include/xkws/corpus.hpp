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
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "xkws/features.hpp"
#include "xkws/lexicon.hpp"
#include "xkws/targets.hpp"
#include "xkws/text.hpp"

namespace xkws {

enum class Split { kTrain, kDev, kTest };

std::string_view split_name(Split split);
// Throws ValidationError unless name is train, dev or test.
Split parse_split(std::string_view name);

struct FramesFile {
  std::filesystem::path path;
  friend bool operator==(const FramesFile&, const FramesFile&) = default;
};
struct WaveFile {
  std::filesystem::path path;
  friend bool operator==(const WaveFile&, const WaveFile&) = default;
};
struct ConceptSet {
  std::vector<std::string> concepts;
  friend bool operator==(const ConceptSet&, const ConceptSet&) = default;
};
struct TagFile {
  std::filesystem::path path;
  friend bool operator==(const TagFile&, const TagFile&) = default;
};

inline bool operator==(const FrameMatrix& a, const FrameMatrix& b) {
  return a.frames == b.frames && a.frame_rate == b.frame_rate;
}

using FrameSource = std::variant<std::monostate, FrameMatrix, FramesFile, WaveFile>;
using TagSource = std::variant<std::monostate, ConceptSet, TagFile>;

struct UtteranceRecord {
  std::string id;
  Split split = Split::kTrain;
  FrameSource frames;
  TagSource tag_source;
  std::optional<std::vector<std::string>> reference_translation;

  friend bool operator==(const UtteranceRecord&,
                         const UtteranceRecord&) = default;
};

// Records kept in lexicographic id order.
class Corpus {
 public:
  Corpus() = default;
  // Validates every record invariant and sorts by id.
  explicit Corpus(std::vector<UtteranceRecord> records);

  const std::vector<UtteranceRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  // Records of one split, ordered by id.
  std::vector<const UtteranceRecord*> split(Split which) const;
  const UtteranceRecord* find(std::string_view id) const;

  friend bool operator==(const Corpus&, const Corpus&) = default;

 private:
  std::vector<UtteranceRecord> records_;
};

// JSON lines with id, split, frames_path|wav_path, tags_path|concepts and
// translation. Relative paths resolve against the manifest's directory.
Corpus load_manifest(const std::filesystem::path& path);

// Writes records whose frame and tag sources are file references or concept
// sets. In-memory frames are written as frames_dir/<id>.kwsf first.
void write_manifest(const std::filesystem::path& path, const Corpus& corpus,
                    const std::filesystem::path& frames_dir = {});

// The record's frames as T x 39: files are read, waveforms go through
// MFCC extraction, and 13-dim static frames get deltas appended.
FrameMatrix load_frames(const UtteranceRecord& record,
                        const FeatureConfig& config = {});

struct CountRange {
  std::size_t min = 0;
  std::size_t max = 0;
};

struct SyntheticConfig {
  std::size_t num_search_words = 50;
  std::size_t num_query_words = 53;
  // Tagger vocabulary size W; 0 keeps every query-language type.
  std::size_t vocab_size = 50;
  std::size_t train_utterances = 500;
  std::size_t dev_utterances = 150;
  std::size_t test_utterances = 500;
  CountRange words_per_utterance{2, 3};
  CountRange frames_per_word{70, 80};
  // Word templates are runs of constant frames this long, each run one of
  // num_phones shared Gaussian vectors, a crude stand-in for phones.
  // num_phones 0 gives every run its own vector; segment_frames 1 with
  // num_phones 0 gives i.i.d. frames.
  std::size_t segment_frames = 8;
  std::size_t num_phones = 40;
  double template_noise_std = 0.5;
  double tagger_hit_prob = 0.9;
  double tagger_p_hi = 0.9;
  double tagger_p_lo = 0.05;
  double tag_noise_std = 0.05;
  std::uint64_t seed = 1;

  void validate() const;
  std::size_t max_utterance_frames() const {
    return words_per_utterance.max * frames_per_word.max;
  }
};

struct SyntheticCorpus {
  Corpus corpus;
  TranslationLexicon lexicon;
  Vocabulary vocabulary;
  TargetMap true_tags;  // every record, every split
};

// Pure function of the config. Each search word owns a fixed template of
// 39-dim frames built from a shared phone inventory; an utterance concatenates the templates of its
// words and adds noise. Its image concepts are its words, its reference
// translation their primary translations, and its tag vector comes from
// simulate_visual_tags applied to the concepts the tagger detects.
SyntheticCorpus generate_synthetic(const SyntheticConfig& config);

// Counts stemmed token occurrences in `references` and draws n distinct
// vocabulary words with at least min_occurrences, uniformly. Returned in
// vocabulary order.
std::vector<std::string> select_keywords(
    const Vocabulary& vocab,
    std::span<const std::vector<std::string>> references, std::size_t n,
    std::size_t min_occurrences, std::uint64_t seed, const Stemmer& stemmer);

}  // namespace xkws
