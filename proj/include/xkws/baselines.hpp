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

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "xkws/corpus.hpp"
#include "xkws/network.hpp"
#include "xkws/spotting.hpp"
#include "xkws/targets.hpp"
#include "xkws/trainer.hpp"

namespace xkws {

enum class ScorerKind {
  kDeTextPrior,
  kDeVisionCnn,
  kXVisionSpeechCnn,
  kXBowCnn,
  kKeyXVisionSpeechCnn,
  kOracleXVisionSpeechCnn,
};

inline constexpr std::array<ScorerKind, 6> kAllScorerKinds{
    ScorerKind::kDeTextPrior,          ScorerKind::kDeVisionCnn,
    ScorerKind::kXVisionSpeechCnn,     ScorerKind::kXBowCnn,
    ScorerKind::kKeyXVisionSpeechCnn,  ScorerKind::kOracleXVisionSpeechCnn};

// de_text_prior, de_vision_cnn, x_vision_speech_cnn, x_bow_cnn,
// key_x_vision_speech_cnn, oracle_x_vision_speech_cnn
std::string_view scorer_kind_name(ScorerKind kind);
ScorerKind parse_scorer_kind(std::string_view name);
// The speech networks; the two text/vision baselines need no training.
bool is_trainable(ScorerKind kind);

// Unigram prior: the fraction of training references containing each word.
// Every utterance gets the same row.
class PriorScorer : public Scorer {
 public:
  PriorScorer(std::span<const std::vector<std::string>> train_references,
              const Vocabulary& vocab, const RelevanceJudge& judge);

  std::string name() const override;
  const std::vector<std::string>& words() const override { return words_; }
  std::vector<double> score(std::string_view id,
                            const FrameMatrix& frames) const override;
  const std::vector<double>& priors() const { return priors_; }

 private:
  std::vector<std::string> words_;
  std::vector<double> priors_;
};

// Returns the tag vector of the image paired with each utterance.
class VisionScorer : public Scorer {
 public:
  VisionScorer(TargetMap tags, std::vector<std::string> words);

  std::string name() const override;
  const std::vector<std::string>& words() const override { return words_; }
  std::vector<double> score(std::string_view id,
                            const FrameMatrix& frames) const override;

 private:
  TargetMap tags_;
  std::vector<std::string> words_;
};

// A trained speech network plus its input normalisation.
class NetworkScorer : public Scorer {
 public:
  NetworkScorer(ScorerKind kind, NetworkParams<float> params,
                std::vector<std::string> words, FeatureStats stats,
                std::size_t input_frames);

  std::string name() const override;
  const std::vector<std::string>& words() const override { return words_; }
  std::vector<double> score(std::string_view id,
                            const FrameMatrix& frames) const override;

  const NetworkParams<float>& params() const { return params_; }

 private:
  ScorerKind kind_;
  NetworkParams<float> params_;
  std::vector<std::string> words_;
  FeatureStats stats_;
  std::size_t input_frames_;
};

// Standardises, then pads or truncates to exactly input_frames rows.
Matrix<float> prepare_input(const FrameMatrix& frames, const FeatureStats& stats,
                            std::size_t input_frames);

// Binary vector marking vocabulary words that translate any concept.
TargetVector concept_indicators(std::span<const std::string> concepts,
                                const TranslationLexicon& lexicon,
                                const Vocabulary& vocab);

// Everything needed to derive training targets for the speech variants.
struct VariantData {
  const Corpus* corpus = nullptr;
  const Vocabulary* vocab = nullptr;
  // Needed for concept-based oracle targets; may be null.
  const TranslationLexicon* lexicon = nullptr;
  // Visual tagger outputs by utterance id. Records with a TagFile source
  // read their own file instead.
  const TargetMap* soft_tags = nullptr;
  std::vector<std::string> keywords;
  Stemmer stemmer = identity_stem;
};

// Soft tag vector of one record. Dev and test records without tags fall
// back to the bag of words of their reference translation; train records
// throw.
TargetVector soft_target(const UtteranceRecord& record, const VariantData& data);

// Network output words for a trainable kind.
std::vector<std::string> variant_output_words(ScorerKind kind,
                                              const VariantData& data);

// Targets for every record of the split:
//   x_vision_speech_cnn   soft tags
//   x_bow_cnn             bag of words of the reference translation
//   key_x_...             soft tags restricted to the keywords
//   oracle_x_...          concept indicators when concepts and a lexicon
//                         are available, soft tags thresholded at 0.5
//                         otherwise
TargetMap variant_targets(ScorerKind kind, const VariantData& data, Split split);

struct TrainedVariant {
  ScorerKind kind = ScorerKind::kXVisionSpeechCnn;
  NetworkParams<float> params;
  std::vector<std::string> output_words;
  FeatureStats stats;
  std::size_t input_frames = 0;
  TrainHistory history;
};

using FrameLoader = std::function<FrameMatrix(const UtteranceRecord&)>;

// Builds the variant's targets, normalises train and dev frames with train
// statistics and runs train(). Throws for kinds that are not trainable and
// for key_x without keywords.
TrainedVariant train_variant(ScorerKind kind, const VariantData& data,
                             const FrameLoader& load, const TrainConfig& config,
                             const Architecture& arch, std::size_t input_frames,
                             std::uint64_t init_seed,
                             const EpochCallback& on_epoch = {});

}  // namespace xkws
