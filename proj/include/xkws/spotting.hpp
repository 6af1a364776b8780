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

#include <cstddef>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "xkws/features.hpp"
#include "xkws/matrix.hpp"
#include "xkws/text.hpp"

namespace xkws {

// Utterances x words. Rows are kept in ascending id order.
struct ScoreMatrix {
  std::string scorer;
  std::vector<std::string> ids;
  std::vector<std::string> words;
  Matrix<double> scores;

  // Sorts rows by id. Throws on duplicate ids, ragged rows or non-finite
  // entries.
  static ScoreMatrix from_rows(
      std::string scorer, std::vector<std::string> words,
      std::vector<std::pair<std::string, std::vector<double>>> rows);

  void validate() const;
  // Throws ValidationError for a word that is not a column.
  std::size_t column(std::string_view word) const;
  std::vector<double> column_values(std::size_t c) const;
  // Same rows, only the listed words, in that order.
  ScoreMatrix restrict_to(std::span<const std::string> keywords) const;

  friend bool operator==(const ScoreMatrix&, const ScoreMatrix&) = default;
};

// Decides whether a keyword occurs in a reference translation by comparing
// stems. Keyword stems are cached.
class RelevanceJudge {
 public:
  explicit RelevanceJudge(Stemmer stemmer);

  std::string stem(std::string_view token) const;
  bool relevant(std::span<const std::string> reference,
                std::string_view keyword) const;

 private:
  Stemmer stemmer_;
  mutable std::mutex mutex_;
  mutable std::unordered_map<std::string, std::string> cache_;
};

bool relevance(std::span<const std::string> reference, std::string_view keyword,
               const RelevanceJudge& judge);

using IdSet = std::set<std::string, std::less<>>;

// Descending score, ties by ascending id.
std::vector<std::string> rank(const ScoreMatrix& scores,
                              std::string_view keyword);

// Relevant items among the first k, divided by k even when the ranking is
// shorter than k. Throws when k is 0.
double precision_at_k(std::span<const std::string> ranking,
                      const IdSet& relevant, std::size_t k);
// precision_at_k with k = |relevant|; nullopt when nothing is relevant.
std::optional<double> p_at_n(std::span<const std::string> ranking,
                             const IdSet& relevant);

// Equal error rate from a threshold sweep in which tied scores form a single
// step; linear interpolation inside the step where FAR and FRR cross.
// nullopt when every item or no item is relevant.
std::optional<double> eer(std::span<const double> scores,
                          std::span<const char> relevant);

struct PrPoint {
  double threshold = 0;
  double precision = 0;
  double recall = 0;
};

struct ApResult {
  double ap = 0;
  std::vector<PrPoint> curve;  // one point per distinct score, descending
};

// Area under the pooled precision-recall curve, accumulated one tie block
// at a time: sum over blocks of (relevant in block) * precision after the
// block, divided by the total number of relevant pairs. Throws when no pair
// is relevant.
ApResult average_precision(std::span<const double> scores,
                           std::span<const char> relevant);

struct KeywordMetrics {
  std::string keyword;
  std::size_t n = 0;  // utterances whose reference contains the keyword
  std::optional<double> p_at_k;
  std::optional<double> p_at_n;
  std::optional<double> eer;
};

struct EvalOptions {
  std::size_t k = 10;
  bool pooled_eer = false;
};

struct MetricsReport {
  std::string scorer;
  std::size_t k = 10;
  std::vector<KeywordMetrics> keywords;  // in request order
  std::size_t evaluated = 0;             // keywords with n >= 1
  double p_at_k = 0;                     // macro averages
  double p_at_n = 0;
  std::optional<double> eer;  // nullopt when no keyword has one
  double ap = 0;  // pooled over keyword columns
  std::optional<double> pooled_eer;
  std::vector<PrPoint> pr_curve;

  // keyword,n,p_at_10,p_at_n,eer,ap with per-keyword rows then a "macro"
  // and a "pooled" row; six decimals, blank where undefined.
  std::string to_csv() const;
  std::string to_json() const;
  std::string pr_curve_csv() const;  // threshold,precision,recall
};

using ReferenceMap =
    std::map<std::string, std::vector<std::string>, std::less<>>;

// Throws when a keyword is not a column, a scored utterance has no
// reference, or no keyword occurs anywhere.
MetricsReport evaluate(const ScoreMatrix& scores, const ReferenceMap& references,
                       std::span<const std::string> keywords,
                       const RelevanceJudge& judge,
                       const EvalOptions& options = {});

// keyword,rank,id,score,relevant,reference for the top k of every keyword.
std::string rankings_csv(const ScoreMatrix& scores,
                         const ReferenceMap& references,
                         std::span<const std::string> keywords,
                         const RelevanceJudge& judge, std::size_t k);

// Something that maps an utterance to one score per word.
class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual std::string name() const = 0;
  virtual const std::vector<std::string>& words() const = 0;
  virtual std::vector<double> score(std::string_view id,
                                    const FrameMatrix& frames) const = 0;
};

struct SearchItem {
  std::string id;
  FrameMatrix frames;  // may be empty for scorers that ignore speech
};

// One row per item. A failure is rethrown as Error naming the utterance.
ScoreMatrix score_collection(const Scorer& scorer,
                             std::span<const SearchItem> items,
                             std::size_t threads = 1);

}  // namespace xkws
