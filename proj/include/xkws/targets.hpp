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
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "xkws/lexicon.hpp"
#include "xkws/text.hpp"

namespace xkws {

// Ordered query-language word types; position is the network output index.
class Vocabulary {
 public:
  Vocabulary() = default;
  // Throws ValidationError on duplicates or stop words.
  explicit Vocabulary(std::vector<std::string> words,
                      std::set<std::string> stop_list = {});

  // The W most frequent non-stop types, ties broken lexicographically.
  static Vocabulary build(std::span<const std::vector<std::string>> token_lists,
                          std::size_t size,
                          const std::set<std::string>& stop_list = {});

  std::size_t size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }
  const std::string& word(std::size_t i) const { return words_.at(i); }
  std::optional<std::size_t> index(std::string_view word) const;
  bool contains(std::string_view word) const { return index(word).has_value(); }
  const std::set<std::string>& stop_list() const { return stop_list_; }

  std::uint64_t hash() const;

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.words_ == b.words_;
  }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::size_t> index_;
  std::set<std::string> stop_list_;
};

// Whitespace-separated words; '#' starts a comment line.
std::set<std::string> read_stop_list(const std::filesystem::path& path);
void write_vocabulary(const std::filesystem::path& path, const Vocabulary& v);
Vocabulary read_vocabulary(const std::filesystem::path& path);

enum class TargetKind { kSoft, kBinary };

struct TargetVector {
  std::vector<float> values;
  TargetKind kind = TargetKind::kSoft;

  std::size_t size() const { return values.size(); }
  // Entries in [0, 1]; binary vectors hold only 0 and 1.
  void validate() const;

  friend bool operator==(const TargetVector&, const TargetVector&) = default;
};

using TargetMap = std::map<std::string, TargetVector, std::less<>>;

// Multi-hot: entry w is 1 iff some token's stem equals the stem of word w.
TargetVector build_bow_target(std::span<const std::string> translation,
                              const Vocabulary& vocab, const Stemmer& stemmer);

// Stand-in for an external visual tagger. Vocabulary words that translate a
// present concept start at p_hi, all others at p_lo; Gaussian noise is added
// and the result clipped to [0, 1].
TargetVector simulate_visual_tags(std::span<const std::string> concepts,
                                  const TranslationLexicon& lexicon,
                                  const Vocabulary& vocab, double p_hi,
                                  double p_lo, double noise_std,
                                  std::uint64_t seed);

// Entries >= threshold become 1, the rest 0.
TargetVector binarize(const TargetVector& target, float threshold = 0.5f);

// Keeps only the listed output dimensions, in the given order.
TargetVector restrict_to(const TargetVector& target,
                         std::span<const std::size_t> indices);

// Tag vectors live in a KWSF file with one row per utterance and D = W.
// The sidecar "<path>.index.jsonl" maps rows to ids: {"row": r, "id": "..."}.
std::filesystem::path tag_index_path(const std::filesystem::path& path);
TargetMap load_tag_vectors(const std::filesystem::path& path,
                           const Vocabulary& vocab);
void write_tag_vectors(const std::filesystem::path& path,
                       const TargetMap& tags);

}  // namespace xkws
