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

#include <doctest.h>

#include <algorithm>

#include "xkws/baselines.hpp"
#include "xkws/corpus.hpp"
#include "xkws/errors.hpp"

using namespace xkws;

namespace {

SyntheticConfig tiny_config() {
  SyntheticConfig c;
  c.num_search_words = 8;
  c.num_query_words = 9;
  c.vocab_size = 0;
  c.train_utterances = 10;
  c.dev_utterances = 4;
  c.test_utterances = 12;
  c.words_per_utterance = {3, 3};
  c.frames_per_word = {45, 48};
  c.seed = 4;
  return c;
}

Architecture small_arch() {
  Architecture a;
  a.conv = {{{16, 9}, {16, 10}, {32, 11}}};
  a.hidden_units = 32;
  return a;
}

struct Fixture {
  SyntheticCorpus syn;
  VariantData data;
  RelevanceJudge judge{identity_stem};

  explicit Fixture(const SyntheticConfig& c = tiny_config()) : syn(generate_synthetic(c)) {
    data.corpus = &syn.corpus;
    data.vocab = &syn.vocabulary;
    data.lexicon = &syn.lexicon;
    data.soft_tags = &syn.true_tags;
    data.keywords = {syn.vocabulary.word(0), syn.vocabulary.word(1)};
  }

  ReferenceMap references(Split s) const {
    ReferenceMap out;
    for (const auto* r : syn.corpus.split(s)) out[r->id] = *r->reference_translation;
    return out;
  }
  std::vector<SearchItem> items(Split s, bool frames) const {
    std::vector<SearchItem> out;
    for (const auto* r : syn.corpus.split(s))
      out.push_back({r->id, frames ? load_frames(*r) : FrameMatrix{}});
    return out;
  }
  std::vector<std::vector<std::string>> train_refs() const {
    std::vector<std::vector<std::string>> out;
    for (const auto* r : syn.corpus.split(Split::kTrain))
      out.push_back(*r->reference_translation);
    return out;
  }
  std::vector<std::string> keywords_in(Split s) const {
    std::vector<std::string> out;
    const auto refs = references(s);
    for (const auto& w : syn.vocabulary.words())
      for (const auto& [id, ref] : refs)
        if (std::find(ref.begin(), ref.end(), w) != ref.end()) {
          out.push_back(w);
          break;
        }
    return out;
  }
};

}  // namespace

TEST_CASE("scorer kind names round-trip") {
  for (auto k : kAllScorerKinds) CHECK(parse_scorer_kind(scorer_kind_name(k)) == k);
  CHECK_THROWS(parse_scorer_kind("vgg"));
  CHECK_FALSE(is_trainable(ScorerKind::kDeTextPrior));
  CHECK_FALSE(is_trainable(ScorerKind::kDeVisionCnn));
  CHECK(is_trainable(ScorerKind::kKeyXVisionSpeechCnn));
}

TEST_CASE("text prior: fractions, identical rows, EER one half") {
  Fixture f;
  const auto refs = f.train_refs();
  const PriorScorer prior(refs, f.syn.vocabulary, f.judge);
  for (std::size_t w = 0; w < f.syn.vocabulary.size(); ++w) {
    const auto& word = f.syn.vocabulary.word(w);
    const auto count = std::count_if(refs.begin(), refs.end(), [&](const auto& r) {
      return std::find(r.begin(), r.end(), word) != r.end();
    });
    CHECK(prior.priors()[w] == doctest::Approx(double(count) / refs.size()));
  }
  const auto m = score_collection(prior, f.items(Split::kTest, false));
  for (std::size_t r = 1; r < m.ids.size(); ++r)
    for (std::size_t c = 0; c < m.words.size(); ++c) CHECK(m.scores(r, c) == m.scores(0, c));
  CHECK(rank(m, m.words[0]) == m.ids);
  const auto keywords = f.keywords_in(Split::kTest);
  const auto report = evaluate(m, f.references(Split::kTest), keywords, f.judge);
  CHECK(*report.eer == 0.5);

  const Vocabulary extra(std::vector<std::string>{"niemals"});
  const PriorScorer unseen(refs, extra, f.judge);
  CHECK(unseen.priors()[0] == 0.0);
}

TEST_CASE("vision scorer on noise-free tags ranks perfectly") {
  auto c = tiny_config();
  c.tagger_hit_prob = 1.0;
  c.tagger_p_hi = 1.0;
  c.tagger_p_lo = 0.0;
  c.tag_noise_std = 0.0;
  Fixture f(c);
  const VisionScorer vision(f.syn.true_tags, f.syn.vocabulary.words());
  const auto m = score_collection(vision, f.items(Split::kTest, false));
  const auto keywords = f.keywords_in(Split::kTest);
  REQUIRE_FALSE(keywords.empty());
  EvalOptions opt;
  opt.k = 1;
  const auto r = evaluate(m, f.references(Split::kTest), keywords, f.judge, opt);
  CHECK(r.p_at_k == 1.0);
  CHECK(r.p_at_n == 1.0);
  CHECK(*r.eer == 0.0);
  CHECK(r.ap == 1.0);

  TargetMap partial = f.syn.true_tags;
  const std::string gone = f.syn.corpus.split(Split::kTest)[2]->id;
  partial.erase(gone);
  const VisionScorer holes(partial, f.syn.vocabulary.words());
  try {
    score_collection(holes, f.items(Split::kTest, false));
    FAIL("expected a throw");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find(gone) != std::string::npos);
  }
}

TEST_CASE("variant targets and output words") {
  Fixture f;
  const auto W = f.syn.vocabulary.size();
  CHECK(variant_output_words(ScorerKind::kXVisionSpeechCnn, f.data).size() == W);
  CHECK(variant_output_words(ScorerKind::kKeyXVisionSpeechCnn, f.data) == f.data.keywords);

  const auto key = variant_targets(ScorerKind::kKeyXVisionSpeechCnn, f.data, Split::kTrain);
  for (const auto& [id, t] : key) CHECK(t.size() == 2);

  const auto oracle = variant_targets(ScorerKind::kOracleXVisionSpeechCnn, f.data, Split::kTrain);
  const auto bow = variant_targets(ScorerKind::kXBowCnn, f.data, Split::kTrain);
  CHECK(oracle.size() == 10);
  for (const auto& [id, t] : oracle) {
    CHECK(t.kind == TargetKind::kBinary);
    for (float v : t.values) CHECK((v == 0.0f || v == 1.0f));
    // Concept indicators cover synonyms, references only primary words.
    for (std::size_t w = 0; w < W; ++w)
      if (bow.at(id).values[w] == 1.0f) CHECK(t.values[w] == 1.0f);
  }
  const auto soft = variant_targets(ScorerKind::kXVisionSpeechCnn, f.data, Split::kDev);
  for (const auto& [id, t] : soft) CHECK(t == f.syn.true_tags.at(id));

  VariantData no_keywords = f.data;
  no_keywords.keywords.clear();
  CHECK_THROWS(variant_output_words(ScorerKind::kKeyXVisionSpeechCnn, no_keywords));
  CHECK_THROWS(variant_targets(ScorerKind::kDeTextPrior, f.data, Split::kTrain));

  TargetMap missing = f.syn.true_tags;
  const std::string gone = f.syn.corpus.split(Split::kTrain)[0]->id;
  missing.erase(gone);
  VariantData holes = f.data;
  holes.soft_tags = &missing;
  try {
    variant_targets(ScorerKind::kXVisionSpeechCnn, holes, Split::kTrain);
    FAIL("expected a throw");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find(gone) != std::string::npos);
  }
}

TEST_CASE("prepare_input standardises and fixes the length") {
  FrameMatrix fm;
  fm.frames = Matrix<float>(3, kFeatureDim);
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t k = 0; k < kFeatureDim; ++k) fm.frames(r, k) = float(r + 1);
  FeatureStats stats;
  stats.mean.assign(kFeatureDim, 2.0);
  stats.stddev.assign(kFeatureDim, 0.5);
  const auto m = prepare_input(fm, stats, 140);
  CHECK(m.rows() == 140);
  CHECK(m(0, 0) == -2.0f);
  CHECK(m(2, 5) == 2.0f);
  CHECK(m(3, 0) == 0.0f);
  CHECK(prepare_input(fm, stats, 2).rows() == 2);
}

TEST_CASE("key_x network output dimension equals the keyword count") {
  Fixture f;
  TrainConfig c;
  c.max_epochs = 1;
  c.threads = 1;
  const auto v = train_variant(ScorerKind::kKeyXVisionSpeechCnn, f.data,
                               [](const UtteranceRecord& r) { return load_frames(r); },
                               c, small_arch(), 150, 1);
  CHECK(v.output_words == f.data.keywords);
  CHECK(v.params.layers[4].outputs == 2);
  CHECK(v.history.epochs.size() == 1);
  CHECK_THROWS(train_variant(ScorerKind::kDeVisionCnn, f.data,
                             [](const UtteranceRecord& r) { return load_frames(r); },
                             c, small_arch(), 150, 1));
}

TEST_CASE("x_bow network memorises ten utterances to AP one") {
  Fixture f;
  TrainConfig c;
  c.learning_rate = 1e-3;
  c.batch_size = 2;
  c.max_epochs = 150;
  c.patience = 150;
  c.threads = 1;
  const auto load = [](const UtteranceRecord& r) { return load_frames(r); };
  // Early stopping keeps the best dev epoch; memorisation is about the last.
  NetworkParams<float> last;
  const auto v = train_variant(
      ScorerKind::kXBowCnn, f.data, load, c, small_arch(), 150, 3,
      [&](const EpochRecord&, bool, const NetworkParams<float>& p) { last = p; });
  CHECK(v.history.epochs.back().train_loss < 0.05);
  const NetworkScorer scorer(ScorerKind::kXBowCnn, last, v.output_words,
                             v.stats, v.input_frames);
  const auto m = score_collection(scorer, f.items(Split::kTrain, true));
  for (double s : m.scores.values()) {
    CHECK(s > 0.0);
    CHECK(s < 1.0);
  }
  const auto r = evaluate(m, f.references(Split::kTrain), f.keywords_in(Split::kTrain),
                          f.judge);
  CHECK(r.ap == 1.0);
}
