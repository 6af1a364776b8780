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

#include "xkws/baselines.hpp"

#include <algorithm>

#include "xkws/binary_io.hpp"
#include "xkws/errors.hpp"

namespace xkws {

std::string_view scorer_kind_name(ScorerKind kind) {
  switch (kind) {
    case ScorerKind::kDeTextPrior: return "de_text_prior";
    case ScorerKind::kDeVisionCnn: return "de_vision_cnn";
    case ScorerKind::kXVisionSpeechCnn: return "x_vision_speech_cnn";
    case ScorerKind::kXBowCnn: return "x_bow_cnn";
    case ScorerKind::kKeyXVisionSpeechCnn: return "key_x_vision_speech_cnn";
    case ScorerKind::kOracleXVisionSpeechCnn: return "oracle_x_vision_speech_cnn";
  }
  return "?";
}

ScorerKind parse_scorer_kind(std::string_view name) {
  for (ScorerKind k : kAllScorerKinds)
    if (scorer_kind_name(k) == name) return k;
  throw ValidationError("unknown model kind '" + std::string(name) + "'");
}

bool is_trainable(ScorerKind kind) {
  return kind != ScorerKind::kDeTextPrior && kind != ScorerKind::kDeVisionCnn;
}

PriorScorer::PriorScorer(
    std::span<const std::vector<std::string>> train_references,
    const Vocabulary& vocab, const RelevanceJudge& judge)
    : words_(vocab.words()), priors_(vocab.size(), 0.0) {
  if (train_references.empty())
    throw ValidationError("the prior needs at least one training reference");
  for (std::size_t w = 0; w < words_.size(); ++w) {
    std::size_t hits = 0;
    for (const auto& ref : train_references)
      hits += judge.relevant(ref, words_[w]) ? 1 : 0;
    priors_[w] = static_cast<double>(hits) /
                 static_cast<double>(train_references.size());
  }
}

std::string PriorScorer::name() const {
  return std::string(scorer_kind_name(ScorerKind::kDeTextPrior));
}

std::vector<double> PriorScorer::score(std::string_view,
                                       const FrameMatrix&) const {
  return priors_;
}

VisionScorer::VisionScorer(TargetMap tags, std::vector<std::string> words)
    : tags_(std::move(tags)), words_(std::move(words)) {}

std::string VisionScorer::name() const {
  return std::string(scorer_kind_name(ScorerKind::kDeVisionCnn));
}

std::vector<double> VisionScorer::score(std::string_view id,
                                        const FrameMatrix&) const {
  auto it = tags_.find(id);
  if (it == tags_.end())
    throw ValidationError("no tag vector for '" + std::string(id) + "'");
  if (it->second.size() != words_.size())
    throw DimensionError("tag vector for '" + std::string(id) +
                         "' does not match the vocabulary");
  return {it->second.values.begin(), it->second.values.end()};
}

Matrix<float> prepare_input(const FrameMatrix& frames, const FeatureStats& stats,
                            std::size_t input_frames) {
  FrameMatrix f = frames;
  stats.apply(f);
  return fit_length(f, input_frames, input_frames).frames;
}

NetworkScorer::NetworkScorer(ScorerKind kind, NetworkParams<float> params,
                             std::vector<std::string> words, FeatureStats stats,
                             std::size_t input_frames)
    : kind_(kind),
      params_(std::move(params)),
      words_(std::move(words)),
      stats_(std::move(stats)),
      input_frames_(input_frames) {
  params_.validate();
  if (words_.size() != params_.output_dim)
    throw DimensionError("network has " + std::to_string(params_.output_dim) +
                         " outputs but " + std::to_string(words_.size()) +
                         " words");
  if (input_frames_ < params_.arch.min_input_frames())
    throw LengthError("input length " + std::to_string(input_frames_) +
                      " is below the network minimum of " +
                      std::to_string(params_.arch.min_input_frames()));
}

std::string NetworkScorer::name() const {
  return std::string(scorer_kind_name(kind_));
}

std::vector<double> NetworkScorer::score(std::string_view,
                                         const FrameMatrix& frames) const {
  const auto trace =
      forward(params_, prepare_input(frames, stats_, input_frames_));
  return {trace.scores.begin(), trace.scores.end()};
}

TargetVector concept_indicators(std::span<const std::string> concepts,
                                const TranslationLexicon& lexicon,
                                const Vocabulary& vocab) {
  TargetVector out{std::vector<float>(vocab.size(), 0.0f), TargetKind::kBinary};
  for (const auto& c : concepts)
    for (const auto& q : lexicon.translations(c))
      if (auto w = vocab.index(q)) out.values[*w] = 1.0f;
  return out;
}

namespace {

void check_data(const VariantData& data) {
  if (!data.corpus || !data.vocab)
    throw ValidationError("variant data needs a corpus and a vocabulary");
}

std::vector<std::size_t> keyword_indices(const VariantData& data) {
  if (data.keywords.empty())
    throw ValidationError("key_x_vision_speech_cnn needs at least one keyword");
  std::vector<std::size_t> out;
  for (const auto& k : data.keywords) {
    auto w = data.vocab->index(k);
    if (!w)
      throw ValidationError("keyword '" + k + "' is not in the vocabulary");
    out.push_back(*w);
  }
  return out;
}

TargetVector bow_target(const UtteranceRecord& r, const VariantData& data) {
  if (!r.reference_translation)
    throw ValidationError("x_bow_cnn needs a reference translation for '" +
                          r.id + "'");
  return build_bow_target(*r.reference_translation, *data.vocab, data.stemmer);
}

}  // namespace

TargetVector soft_target(const UtteranceRecord& r, const VariantData& data) {
  check_data(data);
  const std::size_t W = data.vocab->size();
  if (const auto* tf = std::get_if<TagFile>(&r.tag_source)) {
    const Matrix<float> m = read_frame_file(tf->path);
    if (m.rows() != 1 || m.cols() != W)
      throw DimensionError("tag file for '" + r.id + "' must hold 1 x " +
                           std::to_string(W) + " values");
    TargetVector t{{m.values().begin(), m.values().end()}, TargetKind::kSoft};
    t.validate();
    return t;
  }
  if (data.soft_tags) {
    auto it = data.soft_tags->find(r.id);
    if (it != data.soft_tags->end()) {
      if (it->second.size() != W)
        throw DimensionError("tag vector for '" + r.id +
                             "' does not match the vocabulary");
      return it->second;
    }
  }
  if (r.split != Split::kTrain && r.reference_translation) {
    TargetVector t = build_bow_target(*r.reference_translation, *data.vocab,
                                      data.stemmer);
    t.kind = TargetKind::kSoft;
    return t;
  }
  throw ValidationError("no tag vector for '" + r.id + "'");
}

std::vector<std::string> variant_output_words(ScorerKind kind,
                                              const VariantData& data) {
  check_data(data);
  if (!is_trainable(kind))
    throw ValidationError(std::string(scorer_kind_name(kind)) +
                          " is not a trainable model");
  if (kind == ScorerKind::kKeyXVisionSpeechCnn) {
    keyword_indices(data);
    return data.keywords;
  }
  return data.vocab->words();
}

TargetMap variant_targets(ScorerKind kind, const VariantData& data,
                          Split split) {
  variant_output_words(kind, data);
  std::vector<std::size_t> keys;
  if (kind == ScorerKind::kKeyXVisionSpeechCnn) keys = keyword_indices(data);
  TargetMap out;
  for (const UtteranceRecord* r : data.corpus->split(split)) {
    TargetVector t;
    switch (kind) {
      case ScorerKind::kXVisionSpeechCnn:
        t = soft_target(*r, data);
        break;
      case ScorerKind::kXBowCnn:
        t = bow_target(*r, data);
        break;
      case ScorerKind::kKeyXVisionSpeechCnn:
        t = restrict_to(soft_target(*r, data), keys);
        break;
      case ScorerKind::kOracleXVisionSpeechCnn: {
        const auto* cs = std::get_if<ConceptSet>(&r->tag_source);
        t = (cs && data.lexicon)
                ? concept_indicators(cs->concepts, *data.lexicon, *data.vocab)
                : binarize(soft_target(*r, data), 0.5f);
        break;
      }
      default:
        throw ValidationError("not trainable");
    }
    out.emplace(r->id, std::move(t));
  }
  return out;
}

TrainedVariant train_variant(ScorerKind kind, const VariantData& data,
                             const FrameLoader& load, const TrainConfig& config,
                             const Architecture& arch, std::size_t input_frames,
                             std::uint64_t init_seed,
                             const EpochCallback& on_epoch) {
  TrainedVariant out;
  out.kind = kind;
  out.output_words = variant_output_words(kind, data);
  out.input_frames = input_frames;
  if (input_frames < arch.min_input_frames())
    throw LengthError("input length " + std::to_string(input_frames) +
                      " is below the network minimum of " +
                      std::to_string(arch.min_input_frames()));

  const auto train_records = data.corpus->split(Split::kTrain);
  const auto dev_records = data.corpus->split(Split::kDev);
  std::vector<FrameMatrix> train_frames;
  train_frames.reserve(train_records.size());
  for (const auto* r : train_records) train_frames.push_back(load(*r));
  std::vector<const FrameMatrix*> ptrs;
  for (const auto& f : train_frames) ptrs.push_back(&f);
  out.stats = FeatureStats::compute(ptrs);

  const auto make = [&](Split split,
                        std::span<const UtteranceRecord* const> records,
                        const std::vector<FrameMatrix>* loaded) {
    const TargetMap targets = variant_targets(kind, data, split);
    std::vector<Example> examples;
    examples.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
      const FrameMatrix f = loaded ? (*loaded)[i] : load(*records[i]);
      examples.push_back({records[i]->id,
                          prepare_input(f, out.stats, input_frames),
                          targets.at(records[i]->id).values});
    }
    return examples;
  };
  const auto train_set = make(Split::kTrain, train_records, &train_frames);
  train_frames.clear();
  const auto dev_set = make(Split::kDev, dev_records, nullptr);

  TrainResult result = train(train_set, dev_set, config, arch,
                             out.output_words.size(), init_seed, on_epoch);
  out.params = std::move(result.params);
  out.history = std::move(result.history);
  return out;
}

}  // namespace xkws
