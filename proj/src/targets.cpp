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

#include "xkws/targets.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <random>
#include <sstream>

#include "xkws/binary_io.hpp"
#include "xkws/errors.hpp"

namespace xkws {

Vocabulary::Vocabulary(std::vector<std::string> words,
                       std::set<std::string> stop_list)
    : words_(std::move(words)), stop_list_(std::move(stop_list)) {
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (stop_list_.count(words_[i]))
      throw ValidationError("vocabulary word '" + words_[i] +
                            "' is a stop word");
    if (!index_.emplace(words_[i], i).second)
      throw ValidationError("duplicate vocabulary word '" + words_[i] + "'");
  }
}

Vocabulary Vocabulary::build(
    std::span<const std::vector<std::string>> token_lists, std::size_t size,
    const std::set<std::string>& stop_list) {
  std::map<std::string, std::size_t> counts;
  for (const auto& tokens : token_lists)
    for (const auto& t : tokens)
      if (!stop_list.count(t)) ++counts[t];
  if (counts.empty())
    throw ValidationError("no tokens left after stop-word removal");
  if (counts.size() < size)
    throw ValidationError("requested " + std::to_string(size) +
                          " vocabulary words but only " +
                          std::to_string(counts.size()) + " types available");
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(),
                                                          counts.end());
  // counts is already lexicographic, so a stable sort keeps that tie order.
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> words;
  words.reserve(size);
  for (std::size_t i = 0; i < size; ++i) words.push_back(ranked[i].first);
  return Vocabulary(std::move(words), stop_list);
}

std::optional<std::size_t> Vocabulary::index(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::uint64_t Vocabulary::hash() const {
  std::string joined;
  for (const auto& w : words_) {
    joined += w;
    joined += '\n';
  }
  return fnv1a64(joined);
}

std::set<std::string> read_stop_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open stop list " + path.string());
  std::set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '#') continue;
    for (auto& w : split_whitespace(line)) out.insert(std::move(w));
  }
  return out;
}

void write_vocabulary(const std::filesystem::path& path, const Vocabulary& v) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  for (const auto& w : v.words()) out << w << '\n';
}

Vocabulary read_vocabulary(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open vocabulary " + path.string());
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    auto tokens = split_whitespace(line);
    if (tokens.size() > 1)
      throw ParseError(path.string() + ": expected one word per line");
    if (!tokens.empty()) words.push_back(std::move(tokens[0]));
  }
  return Vocabulary(std::move(words));
}

void TargetVector::validate() const {
  for (std::size_t i = 0; i < values.size(); ++i) {
    const float v = values[i];
    if (!(v >= 0.0f && v <= 1.0f))
      throw ValidationError("target entry " + std::to_string(i) + " = " +
                            std::to_string(v) + " is outside [0, 1]");
    if (kind == TargetKind::kBinary && v != 0.0f && v != 1.0f)
      throw ValidationError("binary target entry " + std::to_string(i) +
                            " is not 0 or 1");
  }
}

TargetVector build_bow_target(std::span<const std::string> translation,
                              const Vocabulary& vocab, const Stemmer& stemmer) {
  std::unordered_map<std::string, std::vector<std::size_t>> by_stem;
  for (std::size_t w = 0; w < vocab.size(); ++w)
    by_stem[stemmer(vocab.word(w))].push_back(w);
  TargetVector t{std::vector<float>(vocab.size(), 0.0f), TargetKind::kBinary};
  for (const auto& token : translation) {
    auto it = by_stem.find(stemmer(token));
    if (it == by_stem.end()) continue;
    for (std::size_t w : it->second) t.values[w] = 1.0f;
  }
  return t;
}

TargetVector simulate_visual_tags(std::span<const std::string> concepts,
                                  const TranslationLexicon& lexicon,
                                  const Vocabulary& vocab, double p_hi,
                                  double p_lo, double noise_std,
                                  std::uint64_t seed) {
  if (!(p_lo < p_hi))
    throw ValidationError("simulated tagger needs p_lo < p_hi");
  std::vector<double> base(vocab.size(), p_lo);
  for (const auto& concept_word : concepts)
    for (const auto& q : lexicon.translations(concept_word))
      if (auto w = vocab.index(q)) base[*w] = p_hi;

  TargetVector t{std::vector<float>(vocab.size()), TargetKind::kSoft};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t w = 0; w < base.size(); ++w) {
    double v = base[w];
    if (noise_std > 0) v += noise_std * noise(rng);
    t.values[w] = static_cast<float>(std::clamp(v, 0.0, 1.0));
  }
  return t;
}

TargetVector binarize(const TargetVector& target, float threshold) {
  TargetVector out{std::vector<float>(target.size()), TargetKind::kBinary};
  for (std::size_t i = 0; i < target.size(); ++i)
    out.values[i] = target.values[i] >= threshold ? 1.0f : 0.0f;
  return out;
}

TargetVector restrict_to(const TargetVector& target,
                         std::span<const std::size_t> indices) {
  TargetVector out{{}, target.kind};
  out.values.reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= target.size())
      throw DimensionError("target index " + std::to_string(i) +
                           " out of range");
    out.values.push_back(target.values[i]);
  }
  return out;
}

std::filesystem::path tag_index_path(const std::filesystem::path& path) {
  return std::filesystem::path(path.string() + ".index.jsonl");
}

TargetMap load_tag_vectors(const std::filesystem::path& path,
                           const Vocabulary& vocab) {
  const Matrix<float> m = read_frame_file(path);
  if (m.cols() != vocab.size())
    throw DimensionError(path.string() + ": tag vectors have dimension " +
                         std::to_string(m.cols()) + " but the vocabulary has " +
                         std::to_string(vocab.size()) + " words");
  const auto index = tag_index_path(path);
  std::ifstream in(index);
  if (!in) throw Error("cannot open tag index " + index.string());
  TargetMap out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::size_t row;
    std::string id;
    try {
      const auto j = nlohmann::json::parse(line);
      row = j.at("row").get<std::size_t>();
      id = j.at("id").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(index.string() + ":" + std::to_string(line_no) + ": " +
                       e.what());
    }
    if (row >= m.rows())
      throw ParseError(index.string() + ":" + std::to_string(line_no) +
                       ": row " + std::to_string(row) + " out of range");
    TargetVector t{{m.row(row).begin(), m.row(row).end()}, TargetKind::kSoft};
    try {
      t.validate();
    } catch (const ValidationError& e) {
      throw ValidationError("tag vector for '" + id + "': " + e.what());
    }
    if (!out.emplace(id, std::move(t)).second)
      throw ValidationError(index.string() + ": duplicate id '" + id + "'");
  }
  return out;
}

void write_tag_vectors(const std::filesystem::path& path,
                       const TargetMap& tags) {
  const std::size_t dim = tags.empty() ? 0 : tags.begin()->second.size();
  Matrix<float> m(tags.size(), dim);
  std::ofstream index(tag_index_path(path));
  if (!index) throw Error("cannot write " + tag_index_path(path).string());
  std::size_t row = 0;
  for (const auto& [id, t] : tags) {
    if (t.size() != dim) throw DimensionError("tag vectors differ in length");
    std::copy(t.values.begin(), t.values.end(), m.row(row).begin());
    index << nlohmann::json{{"row", row}, {"id", id}}.dump() << '\n';
    ++row;
  }
  write_frame_file(path, m);
}

}  // namespace xkws
