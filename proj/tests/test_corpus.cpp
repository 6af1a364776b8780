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

#include <fstream>
#include <set>

#include "test_util.hpp"
#include "xkws/binary_io.hpp"
#include "xkws/corpus.hpp"
#include "xkws/errors.hpp"
#include "xkws/network.hpp"

using namespace xkws;

namespace {

SyntheticConfig small_config() {
  SyntheticConfig c;
  c.train_utterances = 120;
  c.dev_utterances = 10;
  c.test_utterances = 12;
  return c;
}

void write_lines(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

UtteranceRecord record(std::string id, Split split) {
  UtteranceRecord r;
  r.id = std::move(id);
  r.split = split;
  r.frames = FramesFile{"x.kwsf"};
  if (split == Split::kTrain) r.tag_source = ConceptSet{{"dog"}};
  else r.reference_translation = std::vector<std::string>{"Hund"};
  return r;
}

}  // namespace

TEST_CASE("split names") {
  CHECK(parse_split("dev") == Split::kDev);
  CHECK(split_name(Split::kTest) == "test");
  CHECK_THROWS_AS(parse_split("valid"), ValidationError);
}

TEST_CASE("corpus sorts by id and enforces record invariants") {
  Corpus c({record("b", Split::kTest), record("a", Split::kTrain)});
  CHECK(c.records()[0].id == "a");
  CHECK(c.find("b") != nullptr);
  CHECK(c.find("c") == nullptr);
  CHECK(c.split(Split::kTest).size() == 1);

  CHECK_THROWS_AS(Corpus({record("a", Split::kDev), record("a", Split::kTest)}),
                  ValidationError);
  auto untagged = record("t", Split::kTrain);
  untagged.tag_source = std::monostate{};
  CHECK_THROWS_AS(Corpus({untagged}), ValidationError);
  auto unreferenced = record("d", Split::kDev);
  unreferenced.reference_translation.reset();
  CHECK_THROWS_AS(Corpus({unreferenced}), ValidationError);
}

TEST_CASE("manifest round-trip resolves relative paths") {
  testing::TempDir dir;
  Matrix<float> m(140, 39, 0.5f);
  write_frame_file(dir / "u1.kwsf", m);
  write_lines(dir / "manifest.jsonl",
              R"({"id":"u1","split":"train","frames_path":"u1.kwsf","concepts":["dog","ball"]})"
              "\n\n"
              R"({"id":"u2","split":"test","wav_path":"/abs/u2.wav","translation":["Hund"]})"
              "\n");
  const Corpus c = load_manifest(dir / "manifest.jsonl");
  REQUIRE(c.size() == 2);
  const auto& u1 = c.records()[0];
  CHECK(std::get<FramesFile>(u1.frames).path == dir / "u1.kwsf");
  CHECK(std::get<ConceptSet>(u1.tag_source).concepts.size() == 2);
  CHECK(std::get<WaveFile>(c.records()[1].frames).path == "/abs/u2.wav");
  CHECK(load_frames(u1).num_frames() == 140);

  write_manifest(dir / "copy.jsonl", c);
  CHECK(load_manifest(dir / "copy.jsonl") == c);
}

TEST_CASE("manifest errors carry the line number") {
  testing::TempDir dir;
  write_lines(dir / "m.jsonl",
              R"({"id":"a","split":"test","frames_path":"a.kwsf","translation":[]})"
              "\n{not json\n");
  try {
    load_manifest(dir / "m.jsonl");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find(":2:") != std::string::npos);
  }
  write_lines(dir / "dup.jsonl",
              R"({"id":"a","split":"test","frames_path":"a.kwsf","translation":[]})"
              "\n"
              R"({"id":"a","split":"test","frames_path":"b.kwsf","translation":[]})"
              "\n");
  CHECK_THROWS_AS(load_manifest(dir / "dup.jsonl"), ValidationError);
  write_lines(dir / "both.jsonl",
              R"({"id":"a","split":"test","frames_path":"a","wav_path":"b"})");
  CHECK_THROWS_AS(load_manifest(dir / "both.jsonl"), ParseError);
  write_lines(dir / "split.jsonl",
              R"({"id":"a","split":"holdout","frames_path":"a"})");
  CHECK_THROWS_AS(load_manifest(dir / "split.jsonl"), ParseError);
  write_lines(dir / "empty.jsonl", "\n");
  CHECK(load_manifest(dir / "empty.jsonl").empty());
  CHECK_THROWS_AS(load_manifest(dir / "missing.jsonl"), Error);
}

TEST_CASE("load_frames appends deltas to static frames and names the id") {
  testing::TempDir dir;
  write_frame_file(dir / "s.kwsf", Matrix<float>(20, 13, 1.0f));
  write_frame_file(dir / "bad.kwsf", Matrix<float>(20, 7, 1.0f));
  UtteranceRecord r = record("s", Split::kTest);
  r.frames = FramesFile{dir / "s.kwsf"};
  CHECK(load_frames(r).dim() == 39);
  r.id = "broken";
  r.frames = FramesFile{dir / "bad.kwsf"};
  try {
    load_frames(r);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("broken") != std::string::npos);
  }
}

TEST_CASE("synthetic corpus is a pure function of its config") {
  const auto c = small_config();
  const auto a = generate_synthetic(c);
  const auto b = generate_synthetic(c);
  CHECK(a.corpus == b.corpus);
  CHECK(a.vocabulary == b.vocabulary);
  CHECK(a.true_tags == b.true_tags);
  CHECK(a.lexicon == b.lexicon);
  auto other = c;
  other.seed = 2;
  CHECK_FALSE(generate_synthetic(other).corpus == a.corpus);
}

TEST_CASE("synthetic corpus shape") {
  const auto c = small_config();
  const auto s = generate_synthetic(c);
  CHECK(s.corpus.split(Split::kTrain).size() == 120);
  CHECK(s.corpus.split(Split::kDev).size() == 10);
  CHECK(s.corpus.split(Split::kTest).size() == 12);
  CHECK(s.vocabulary.size() == 50);
  CHECK(s.lexicon.size() == 50);
  CHECK(s.lexicon.query_words().size() == 53);
  CHECK(s.true_tags.size() == s.corpus.size());
  for (const auto& r : s.corpus.records()) {
    const auto& fm = std::get<FrameMatrix>(r.frames);
    CHECK(fm.dim() == kFeatureDim);
    CHECK(fm.num_frames() >= kMinInputFrames);
    CHECK(fm.num_frames() <= c.max_utterance_frames());
    const auto& concepts = std::get<ConceptSet>(r.tag_source).concepts;
    CHECK(concepts.size() >= c.words_per_utterance.min);
    CHECK(concepts.size() <= c.words_per_utterance.max);
    CHECK(std::set<std::string>(concepts.begin(), concepts.end()).size() ==
          concepts.size());
    REQUIRE(r.reference_translation);
    for (std::size_t i = 0; i < concepts.size(); ++i)
      CHECK((*r.reference_translation)[i] == s.lexicon.primary(concepts[i]));
    CHECK(s.true_tags.at(r.id).size() == 50);
  }
}

TEST_CASE("noise-free synthetic tags mark translated concepts") {
  auto c = small_config();
  c.tag_noise_std = 0;
  c.tagger_hit_prob = 1;
  const auto s = generate_synthetic(c);
  for (const auto& r : s.corpus.records()) {
    const auto& tags = s.true_tags.at(r.id);
    const auto& concepts = std::get<ConceptSet>(r.tag_source).concepts;
    for (std::size_t w = 0; w < s.vocabulary.size(); ++w) {
      bool present = false;
      for (const auto& con : concepts)
        for (const auto& q : s.lexicon.translations(con))
          present |= q == s.vocabulary.word(w);
      CHECK(tags.values[w] == doctest::Approx(present ? 0.9 : 0.05));
    }
  }
}

TEST_CASE("synthetic config validation") {
  auto c = small_config();
  c.frames_per_word = {30, 40};
  CHECK_THROWS_AS(c.validate(), ValidationError);  // 3 * 30 < 134
  c = small_config();
  c.tagger_p_lo = 0.95;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = small_config();
  c.vocab_size = 60;
  CHECK_THROWS_AS(c.validate(), ValidationError);
}

TEST_CASE("keyword selection") {
  const auto s = generate_synthetic(small_config());
  std::vector<std::vector<std::string>> refs;
  for (const auto* r : s.corpus.split(Split::kTest))
    refs.push_back(*r->reference_translation);
  const auto a = select_keywords(s.vocabulary, refs, 5, 1, 7, identity_stem);
  CHECK(a == select_keywords(s.vocabulary, refs, 5, 1, 7, identity_stem));
  REQUIRE(a.size() == 5);
  std::size_t last = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto w = s.vocabulary.index(a[i]);
    REQUIRE(w);
    if (i > 0) CHECK(*w > last);
    last = *w;
    bool occurs = false;
    for (const auto& ref : refs)
      for (const auto& t : ref) occurs |= t == a[i];
    CHECK(occurs);
  }
  CHECK_THROWS_AS(select_keywords(s.vocabulary, refs, 5, 1000, 7, identity_stem),
                  ValidationError);
  CHECK(select_keywords(s.vocabulary, refs, 50, 0, 7, identity_stem).size() == 50);
}

TEST_CASE("lexicon round-trip and lookups") {
  testing::TempDir dir;
  TranslationLexicon lex;
  lex.add("dog", "Hund");
  lex.add("dog", "Hündchen");
  lex.add("dog", "Hund");
  lex.add("big", "groß");
  CHECK(lex.translations("dog").size() == 2);
  CHECK(lex.primary("dog") == "Hund");
  CHECK_THROWS_AS(lex.translations("cat"), ValidationError);
  write_lexicon(dir / "lex.json", lex);
  CHECK(read_lexicon(dir / "lex.json") == lex);
  write_lines(dir / "bad.json", R"({"dog": []})");
  CHECK_THROWS_AS(read_lexicon(dir / "bad.json"), ParseError);
}
