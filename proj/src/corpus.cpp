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

#include "xkws/corpus.hpp"

#include <array>
#include <algorithm>
#include <fmt/format.h>
#include <fstream>
#include <json.hpp>
#include <map>
#include <random>
#include <set>

#include "xkws/binary_io.hpp"
#include "xkws/errors.hpp"
#include "xkws/log.hpp"
#include "xkws/network.hpp"

namespace xkws {

std::string_view split_name(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kDev: return "dev";
    case Split::kTest: return "test";
  }
  return "?";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "dev") return Split::kDev;
  if (name == "test") return Split::kTest;
  throw ValidationError("unknown split '" + std::string(name) +
                        "' (expected train, dev or test)");
}

Corpus::Corpus(std::vector<UtteranceRecord> records)
    : records_(std::move(records)) {
  std::sort(records_.begin(), records_.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto& r = records_[i];
    if (r.id.empty()) throw ValidationError("record with empty id");
    if (i > 0 && records_[i - 1].id == r.id)
      throw ValidationError("duplicate utterance id '" + r.id + "'");
    if (r.split == Split::kTrain &&
        std::holds_alternative<std::monostate>(r.tag_source))
      throw ValidationError("train record '" + r.id + "' has no tag source");
    if (r.split != Split::kTrain && !r.reference_translation)
      throw ValidationError(std::string(split_name(r.split)) + " record '" +
                            r.id + "' has no reference translation");
  }
}

std::vector<const UtteranceRecord*> Corpus::split(Split which) const {
  std::vector<const UtteranceRecord*> out;
  for (const auto& r : records_)
    if (r.split == which) out.push_back(&r);
  return out;
}

const UtteranceRecord* Corpus::find(std::string_view id) const {
  auto it = std::lower_bound(
      records_.begin(), records_.end(), id,
      [](const UtteranceRecord& r, std::string_view key) { return r.id < key; });
  return (it != records_.end() && it->id == id) ? &*it : nullptr;
}

namespace {

std::vector<std::string> string_list(const nlohmann::json& j,
                                     const char* field) {
  if (!j.is_array())
    throw ParseError(std::string("field '") + field + "' must be a list");
  std::vector<std::string> out;
  for (const auto& e : j) out.push_back(e.get<std::string>());
  return out;
}

UtteranceRecord parse_record(const nlohmann::json& j,
                             const std::filesystem::path& base) {
  if (!j.is_object()) throw ParseError("record must be a JSON object");
  const auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
  };
  UtteranceRecord r;
  r.id = j.at("id").get<std::string>();
  r.split = parse_split(j.at("split").get<std::string>());
  const bool has_frames = j.contains("frames_path");
  const bool has_wav = j.contains("wav_path");
  if (has_frames == has_wav)
    throw ParseError("record '" + r.id +
                     "' needs exactly one of frames_path or wav_path");
  if (has_frames)
    r.frames = FramesFile{resolve(j["frames_path"].get<std::string>())};
  else
    r.frames = WaveFile{resolve(j["wav_path"].get<std::string>())};
  const bool has_tags = j.contains("tags_path");
  const bool has_concepts = j.contains("concepts");
  if (has_tags && has_concepts)
    throw ParseError("record '" + r.id +
                     "' has both tags_path and concepts");
  if (has_tags) r.tag_source = TagFile{resolve(j["tags_path"].get<std::string>())};
  if (has_concepts)
    r.tag_source = ConceptSet{string_list(j["concepts"], "concepts")};
  if (j.contains("translation"))
    r.reference_translation = string_list(j["translation"], "translation");
  return r;
}

}  // namespace

Corpus load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open manifest " + path.string());
  const auto base = path.parent_path();
  std::vector<UtteranceRecord> records;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto where = path.string() + ":" + std::to_string(line_no);
    UtteranceRecord r;
    try {
      r = parse_record(nlohmann::json::parse(line), base);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(where + ": " + e.what());
    } catch (const Error& e) {
      throw ParseError(where + ": " + e.what());
    }
    if (!seen.insert(r.id).second)
      throw ValidationError(where + ": duplicate utterance id '" + r.id + "'");
    records.push_back(std::move(r));
  }
  if (records.empty()) log_warning("manifest " + path.string() + " is empty");
  return Corpus(std::move(records));
}

void write_manifest(const std::filesystem::path& path, const Corpus& corpus,
                    const std::filesystem::path& frames_dir) {
  const auto base = path.parent_path();
  // Paths under the manifest's directory become relative; anything else
  // stays as given.
  const auto relative = [&](const std::filesystem::path& p) {
    const auto rel = p.lexically_relative(base);
    if (rel.empty() || *rel.begin() == "..") return p.generic_string();
    return rel.generic_string();
  };
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  for (const auto& r : corpus.records()) {
    nlohmann::ordered_json j;
    j["id"] = r.id;
    j["split"] = split_name(r.split);
    if (const auto* fm = std::get_if<FrameMatrix>(&r.frames)) {
      if (frames_dir.empty())
        throw Error("record '" + r.id + "' holds in-memory frames but no "
                    "frames directory was given");
      const auto file = frames_dir / (r.id + ".kwsf");
      write_frame_file(file, fm->frames);
      j["frames_path"] = relative(file);
    } else if (const auto* ff = std::get_if<FramesFile>(&r.frames)) {
      j["frames_path"] = relative(ff->path);
    } else if (const auto* wf = std::get_if<WaveFile>(&r.frames)) {
      j["wav_path"] = relative(wf->path);
    } else {
      throw Error("record '" + r.id + "' has no frame source");
    }
    if (const auto* tf = std::get_if<TagFile>(&r.tag_source))
      j["tags_path"] = relative(tf->path);
    else if (const auto* cs = std::get_if<ConceptSet>(&r.tag_source))
      j["concepts"] = cs->concepts;
    if (r.reference_translation) j["translation"] = *r.reference_translation;
    out << j.dump() << '\n';
  }
  if (!out) throw Error("failed writing " + path.string());
}

FrameMatrix load_frames(const UtteranceRecord& record,
                        const FeatureConfig& config) {
  FrameMatrix out;
  try {
    if (const auto* fm = std::get_if<FrameMatrix>(&record.frames)) {
      out = *fm;
    } else if (const auto* ff = std::get_if<FramesFile>(&record.frames)) {
      out.frames = read_frame_file(ff->path);
      out.frame_rate = 1.0 / config.hop_length;
    } else if (const auto* wf = std::get_if<WaveFile>(&record.frames)) {
      const Waveform wave = read_wav(wf->path);
      if (wave.sample_rate != config.sample_rate)
        throw ValidationError(
            wf->path.string() + " has sample rate " +
            std::to_string(static_cast<long>(wave.sample_rate)) +
            ", expected " + std::to_string(static_cast<long>(config.sample_rate)));
      out = extract_mfcc(wave.samples, config);
    } else {
      throw ValidationError("no frame source");
    }
    if (out.dim() == kStaticDim) out = append_deltas(out, config.delta_window);
    out.validate();
    if (out.dim() != kFeatureDim)
      throw DimensionError("frames have dimension " + std::to_string(out.dim()) +
                           ", expected " + std::to_string(kFeatureDim));
  } catch (const Error& e) {
    throw Error("utterance '" + record.id + "': " + e.what());
  }
  return out;
}

void SyntheticConfig::validate() const {
  const auto prob = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0))
      throw ValidationError(std::string(name) + " must lie in [0, 1]");
  };
  prob(tagger_hit_prob, "tagger_hit_prob");
  prob(tagger_p_hi, "tagger_p_hi");
  prob(tagger_p_lo, "tagger_p_lo");
  if (!(tagger_p_lo < tagger_p_hi))
    throw ValidationError("tagger_p_lo must be below tagger_p_hi");
  if (!(template_noise_std >= 0) || !(tag_noise_std >= 0))
    throw ValidationError("noise standard deviations must be non-negative");
  if (num_search_words == 0)
    throw ValidationError("num_search_words must be positive");
  if (num_query_words < num_search_words)
    throw ValidationError("num_query_words must be >= num_search_words");
  if (vocab_size > num_query_words)
    throw ValidationError("vocab_size exceeds num_query_words");
  if (words_per_utterance.min == 0 ||
      words_per_utterance.min > words_per_utterance.max)
    throw ValidationError("bad words_per_utterance range");
  if (words_per_utterance.max > num_search_words)
    throw ValidationError("words_per_utterance exceeds num_search_words");
  if (segment_frames == 0) throw ValidationError("segment_frames must be positive");
  if (frames_per_word.min == 0 || frames_per_word.min > frames_per_word.max)
    throw ValidationError("bad frames_per_word range");
  if (words_per_utterance.min * frames_per_word.min < kMinInputFrames)
    throw ValidationError(
        "shortest synthetic utterance (" +
        std::to_string(words_per_utterance.min * frames_per_word.min) +
        " frames) is below the network minimum of " +
        std::to_string(kMinInputFrames));
}

namespace {

struct WordEntry {
  const char* search;
  const char* query;
  const char* synonym;  // may be null
};

// Flickr-style caption words with German glosses.
constexpr WordEntry kWordTable[] = {
    {"dog", "Hund", "Hündchen"},    {"man", "Mann", nullptr},
    {"woman", "Frau", nullptr},     {"boy", "Junge", nullptr},
    {"girl", "Mädchen", nullptr},   {"child", "Kind", nullptr},
    {"people", "Personen", "Leute"}, {"water", "Wasser", nullptr},
    {"field", "Feld", "Wiese"},     {"street", "Straße", nullptr},
    {"shirt", "Hemd", nullptr},     {"ball", "Ball", nullptr},
    {"grass", "Gras", nullptr},     {"bicycle", "Fahrrad", nullptr},
    {"beach", "Strand", nullptr},   {"snow", "Schnee", nullptr},
    {"red", "rot", nullptr},        {"blue", "blau", nullptr},
    {"green", "grün", nullptr},     {"black", "schwarz", nullptr},
    {"white", "weiß", nullptr},     {"big", "groß", "riesig"},
    {"small", "klein", nullptr},    {"young", "jung", nullptr},
    {"running", "läuft", "rennt"},  {"jumping", "springt", nullptr},
    {"climbing", "klettert", nullptr}, {"playing", "spielt", nullptr},
    {"sitting", "sitzt", nullptr},  {"standing", "steht", nullptr},
    {"riding", "fährt", nullptr},   {"walking", "geht", nullptr},
    {"wearing", "trägt", nullptr},  {"rock", "Felsen", nullptr},
    {"mountain", "Berg", nullptr},  {"city", "Stadt", nullptr},
    {"building", "Gebäude", nullptr}, {"car", "Auto", "Wagen"},
    {"wave", "Welle", nullptr},     {"ocean", "Meer", "Ozean"},
    {"hat", "Hut", nullptr},        {"jacket", "Jacke", nullptr},
    {"bench", "Bank", nullptr},     {"tree", "Baum", nullptr},
    {"crowd", "Menge", nullptr},    {"team", "Mannschaft", nullptr},
    {"player", "Spieler", nullptr}, {"uniform", "Uniform", nullptr},
    {"sand", "Sand", nullptr},      {"river", "Fluss", nullptr},
    {"park", "Park", nullptr},      {"horse", "Pferd", nullptr},
    {"table", "Tisch", nullptr},    {"stairs", "Treppe", nullptr},
    {"camera", "Kamera", nullptr},  {"toy", "Spielzeug", nullptr},
    {"baby", "Baby", nullptr},      {"house", "Haus", nullptr},
    {"boat", "Boot", nullptr},      {"bird", "Vogel", nullptr},
};

std::string digits(std::size_t i) { return fmt::format("{:03}", i); }

TranslationLexicon build_lexicon(const SyntheticConfig& c,
                                 std::vector<std::string>& search_words) {
  constexpr std::size_t kTable = std::size(kWordTable);
  TranslationLexicon lex;
  for (std::size_t i = 0; i < c.num_search_words; ++i) {
    const std::string s =
        i < kTable ? kWordTable[i].search : "word" + digits(i);
    const std::string q =
        i < kTable ? kWordTable[i].query : "Wort" + digits(i);
    lex.add(s, q);
    search_words.push_back(s);
  }
  std::size_t extra = c.num_query_words - c.num_search_words;
  for (std::size_t i = 0; i < std::min(c.num_search_words, kTable) && extra > 0;
       ++i) {
    if (kWordTable[i].synonym) {
      lex.add(kWordTable[i].search, kWordTable[i].synonym);
      --extra;
    }
  }
  for (std::size_t k = 0; extra > 0; ++k, --extra) {
    lex.add(search_words[k % search_words.size()], "Synonym" + digits(k));
  }
  return lex;
}

std::string utterance_id(Split split, std::size_t index) {
  return fmt::format("{}_{:05}", split_name(split), index);
}

}  // namespace

SyntheticCorpus generate_synthetic(const SyntheticConfig& c) {
  c.validate();
  SyntheticCorpus out;
  std::vector<std::string> search_words;
  out.lexicon = build_lexicon(c, search_words);

  std::mt19937_64 template_rng(mix_seed(c.seed, "templates"));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<std::array<float, kFeatureDim>> phones(c.num_phones);
  for (auto& ph : phones)
    for (float& v : ph) v = static_cast<float>(gauss(template_rng));
  std::uniform_int_distribution<std::size_t> pick_phone(
      0, std::max<std::size_t>(c.num_phones, 1) - 1);
  std::vector<Matrix<float>> templates;
  for (std::size_t i = 0; i < search_words.size(); ++i) {
    std::uniform_int_distribution<std::size_t> len(c.frames_per_word.min,
                                                   c.frames_per_word.max);
    Matrix<float> t(len(template_rng), kFeatureDim);
    for (std::size_t r = 0; r < t.rows(); ++r) {
      if (r % c.segment_frames != 0) {
        for (std::size_t k = 0; k < kFeatureDim; ++k) t(r, k) = t(r - 1, k);
      } else if (c.num_phones > 0) {
        const auto& ph = phones[pick_phone(template_rng)];
        std::copy(ph.begin(), ph.end(), &t(r, 0));
      } else {
        for (std::size_t k = 0; k < kFeatureDim; ++k)
          t(r, k) = static_cast<float>(gauss(template_rng));
      }
    }
    templates.push_back(std::move(t));
  }

  struct Draft {
    UtteranceRecord record;
    std::vector<std::string> detected;
  };
  std::vector<Draft> drafts;
  const std::pair<Split, std::size_t> counts[] = {
      {Split::kTrain, c.train_utterances},
      {Split::kDev, c.dev_utterances},
      {Split::kTest, c.test_utterances}};
  for (const auto& [split, count] : counts) {
    for (std::size_t u = 0; u < count; ++u) {
      Draft d;
      d.record.id = utterance_id(split, u);
      d.record.split = split;
      std::mt19937_64 rng(mix_seed(c.seed, "utterance:" + d.record.id));
      std::uniform_int_distribution<std::size_t> nwords(
          c.words_per_utterance.min, c.words_per_utterance.max);
      const std::size_t n = nwords(rng);
      std::vector<std::size_t> pool(search_words.size());
      for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
      for (std::size_t i = 0; i < n; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
        std::swap(pool[i], pool[pick(rng)]);
      }
      std::size_t frames = 0;
      for (std::size_t i = 0; i < n; ++i) frames += templates[pool[i]].rows();
      FrameMatrix fm;
      fm.frames = Matrix<float>(frames, kFeatureDim);
      std::size_t row = 0;
      std::vector<std::string> concepts, reference;
      std::bernoulli_distribution hit(c.tagger_hit_prob);
      for (std::size_t i = 0; i < n; ++i) {
        const auto& tpl = templates[pool[i]];
        for (std::size_t t = 0; t < tpl.rows(); ++t, ++row)
          for (std::size_t k = 0; k < kFeatureDim; ++k)
            fm.frames(row, k) = static_cast<float>(
                tpl(t, k) + c.template_noise_std * gauss(rng));
        const auto& word = search_words[pool[i]];
        concepts.push_back(word);
        reference.push_back(out.lexicon.primary(word));
        if (hit(rng)) d.detected.push_back(word);
      }
      d.record.frames = std::move(fm);
      d.record.tag_source = ConceptSet{std::move(concepts)};
      d.record.reference_translation = std::move(reference);
      drafts.push_back(std::move(d));
    }
  }

  // The tagger vocabulary follows the query-language descriptions of the
  // training images, synonyms included.
  std::vector<std::vector<std::string>> descriptions;
  for (const auto& d : drafts) {
    if (d.record.split != Split::kTrain) continue;
    std::vector<std::string> tokens;
    for (const auto& w : std::get<ConceptSet>(d.record.tag_source).concepts)
      for (const auto& q : out.lexicon.translations(w)) tokens.push_back(q);
    descriptions.push_back(std::move(tokens));
  }
  if (descriptions.empty())
    throw ValidationError("synthetic corpus needs at least one train utterance");
  std::size_t vocab_size = c.vocab_size;
  if (vocab_size == 0) {
    std::set<std::string> types;
    for (const auto& tokens : descriptions) types.insert(tokens.begin(), tokens.end());
    vocab_size = types.size();
  }
  out.vocabulary = Vocabulary::build(descriptions, vocab_size);

  std::vector<UtteranceRecord> records;
  for (auto& d : drafts) {
    out.true_tags.emplace(
        d.record.id,
        simulate_visual_tags(d.detected, out.lexicon, out.vocabulary,
                             c.tagger_p_hi, c.tagger_p_lo, c.tag_noise_std,
                             mix_seed(c.seed, "tagger:" + d.record.id)));
    records.push_back(std::move(d.record));
  }
  out.corpus = Corpus(std::move(records));
  return out;
}

std::vector<std::string> select_keywords(
    const Vocabulary& vocab,
    std::span<const std::vector<std::string>> references, std::size_t n,
    std::size_t min_occurrences, std::uint64_t seed, const Stemmer& stemmer) {
  std::map<std::string, std::size_t> stem_counts;
  for (const auto& tokens : references)
    for (const auto& t : tokens) ++stem_counts[stemmer(t)];
  std::vector<std::size_t> eligible;
  for (std::size_t w = 0; w < vocab.size(); ++w) {
    auto it = stem_counts.find(stemmer(vocab.word(w)));
    const std::size_t count = it == stem_counts.end() ? 0 : it->second;
    if (count >= min_occurrences) eligible.push_back(w);
  }
  if (eligible.size() < n)
    throw ValidationError("cannot select " + std::to_string(n) +
                          " keywords: only " + std::to_string(eligible.size()) +
                          " vocabulary words occur at least " +
                          std::to_string(min_occurrences) + " times");
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, eligible.size() - 1);
    std::swap(eligible[i], eligible[pick(rng)]);
  }
  eligible.resize(n);
  std::sort(eligible.begin(), eligible.end());
  std::vector<std::string> out;
  for (std::size_t w : eligible) out.push_back(vocab.word(w));
  return out;
}

}  // namespace xkws
