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

#include "xkws/spotting.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <json.hpp>
#include <numeric>

#include "xkws/errors.hpp"
#include "xkws/parallel.hpp"

namespace xkws {

ScoreMatrix ScoreMatrix::from_rows(
    std::string scorer, std::vector<std::string> words,
    std::vector<std::pair<std::string, std::vector<double>>> rows) {
  std::sort(rows.begin(), rows.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  ScoreMatrix m;
  m.scorer = std::move(scorer);
  m.words = std::move(words);
  m.scores = Matrix<double>(rows.size(), m.words.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].second.size() != m.words.size())
      throw DimensionError("score row for '" + rows[r].first + "' has " +
                           std::to_string(rows[r].second.size()) +
                           " entries, expected " +
                           std::to_string(m.words.size()));
    std::copy(rows[r].second.begin(), rows[r].second.end(),
              m.scores.row(r).begin());
    m.ids.push_back(std::move(rows[r].first));
  }
  m.validate();
  return m;
}

void ScoreMatrix::validate() const {
  if (scores.rows() != ids.size() || scores.cols() != words.size())
    throw DimensionError("score matrix shape does not match ids and words");
  for (std::size_t r = 1; r < ids.size(); ++r)
    if (!(ids[r - 1] < ids[r]))
      throw ValidationError("score rows not strictly sorted by id at '" +
                            ids[r] + "'");
  for (std::size_t r = 0; r < ids.size(); ++r)
    for (double v : scores.row(r))
      if (!std::isfinite(v))
        throw ValidationError("non-finite score for '" + ids[r] + "'");
}

std::size_t ScoreMatrix::column(std::string_view word) const {
  auto it = std::find(words.begin(), words.end(), word);
  if (it == words.end())
    throw ValidationError("keyword '" + std::string(word) +
                          "' is not scored by " + scorer);
  return static_cast<std::size_t>(it - words.begin());
}

std::vector<double> ScoreMatrix::column_values(std::size_t c) const {
  std::vector<double> out(ids.size());
  for (std::size_t r = 0; r < ids.size(); ++r) out[r] = scores(r, c);
  return out;
}

ScoreMatrix ScoreMatrix::restrict_to(
    std::span<const std::string> keywords) const {
  ScoreMatrix out;
  out.scorer = scorer;
  out.ids = ids;
  out.words.assign(keywords.begin(), keywords.end());
  out.scores = Matrix<double>(ids.size(), keywords.size());
  for (std::size_t j = 0; j < keywords.size(); ++j) {
    const std::size_t c = column(keywords[j]);
    for (std::size_t r = 0; r < ids.size(); ++r) out.scores(r, j) = scores(r, c);
  }
  return out;
}

RelevanceJudge::RelevanceJudge(Stemmer stemmer) : stemmer_(std::move(stemmer)) {
  if (!stemmer_) throw ValidationError("relevance judge needs a stemmer");
}

std::string RelevanceJudge::stem(std::string_view token) const {
  return stemmer_(token);
}

bool RelevanceJudge::relevant(std::span<const std::string> reference,
                              std::string_view keyword) const {
  std::string key_stem;
  {
    std::lock_guard lock(mutex_);
    auto it = cache_.find(std::string(keyword));
    if (it == cache_.end())
      it = cache_.emplace(std::string(keyword), stemmer_(keyword)).first;
    key_stem = it->second;
  }
  return std::any_of(reference.begin(), reference.end(),
                     [&](const std::string& t) { return stemmer_(t) == key_stem; });
}

bool relevance(std::span<const std::string> reference, std::string_view keyword,
               const RelevanceJudge& judge) {
  return judge.relevant(reference, keyword);
}

namespace {

// Row order for one column: descending score, then ascending row (= id).
std::vector<std::size_t> ranked_rows(const ScoreMatrix& m, std::size_t c) {
  std::vector<std::size_t> order(m.ids.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double sa = m.scores(a, c), sb = m.scores(b, c);
    return sa != sb ? sa > sb : a < b;
  });
  return order;
}

std::vector<std::size_t> by_descending_score(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] != scores[b] ? scores[a] > scores[b] : a < b;
  });
  return order;
}

void check_lengths(std::span<const double> scores,
                   std::span<const char> relevant) {
  if (scores.size() != relevant.size())
    throw DimensionError("scores and relevance labels differ in length");
  for (double s : scores)
    if (!std::isfinite(s)) throw ValidationError("non-finite score");
}

}  // namespace

std::vector<std::string> rank(const ScoreMatrix& scores,
                              std::string_view keyword) {
  const std::size_t c = scores.column(keyword);
  std::vector<std::string> out;
  for (std::size_t r : ranked_rows(scores, c)) out.push_back(scores.ids[r]);
  return out;
}

double precision_at_k(std::span<const std::string> ranking,
                      const IdSet& relevant, std::size_t k) {
  if (k == 0) throw ValidationError("precision_at_k needs k >= 1");
  const std::size_t top = std::min(k, ranking.size());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < top; ++i) hits += relevant.count(ranking[i]);
  return static_cast<double>(hits) / static_cast<double>(k);
}

std::optional<double> p_at_n(std::span<const std::string> ranking,
                             const IdSet& relevant) {
  if (relevant.empty()) return std::nullopt;
  return precision_at_k(ranking, relevant, relevant.size());
}

std::optional<double> eer(std::span<const double> scores,
                          std::span<const char> relevant) {
  check_lengths(scores, relevant);
  const auto pos = static_cast<std::size_t>(
      std::count_if(relevant.begin(), relevant.end(), [](char r) { return r; }));
  const std::size_t neg = scores.size() - pos;
  if (pos == 0 || neg == 0) return std::nullopt;

  const auto order = by_descending_score(scores);
  // Operating points after accepting each tie block; starts with nothing
  // accepted (FAR 0, FRR 1) and ends with everything accepted (1, 0).
  double prev_far = 0.0, prev_frr = 1.0;
  std::size_t accepted_pos = 0, accepted_neg = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (relevant[order[j]] ? accepted_pos : accepted_neg) += 1;
      ++j;
    }
    i = j;
    const double far = static_cast<double>(accepted_neg) / static_cast<double>(neg);
    const double frr = static_cast<double>(pos - accepted_pos) /
                       static_cast<double>(pos);
    const double d = frr - far;
    if (d <= 0.0) {
      if (d == 0.0) return far;
      const double prev_d = prev_frr - prev_far;
      const double t = prev_d / (prev_d - d);
      return prev_far + t * (far - prev_far);
    }
    prev_far = far;
    prev_frr = frr;
  }
  return prev_far;  // not reached: the final point has FRR 0 and FAR 1
}

ApResult average_precision(std::span<const double> scores,
                           std::span<const char> relevant) {
  check_lengths(scores, relevant);
  const auto total = static_cast<std::size_t>(
      std::count_if(relevant.begin(), relevant.end(), [](char r) { return r; }));
  if (total == 0)
    throw ValidationError("average precision is undefined without relevant pairs");

  const auto order = by_descending_score(scores);
  ApResult out;
  double sum = 0.0;
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double threshold = scores[order[i]];
    std::size_t block_rel = 0;
    while (i < order.size() && scores[order[i]] == threshold) {
      if (relevant[order[i]]) {
        ++block_rel;
        ++tp;
      } else {
        ++fp;
      }
      ++i;
    }
    const double precision =
        static_cast<double>(tp) / static_cast<double>(tp + fp);
    sum += static_cast<double>(block_rel) * precision;
    out.curve.push_back(
        {threshold, precision,
         static_cast<double>(tp) / static_cast<double>(total)});
  }
  out.ap = sum / static_cast<double>(total);
  return out;
}

namespace {

std::string fixed(std::optional<double> v) {
  return v ? fmt::format("{:.6f}", *v) : std::string();
}

nlohmann::ordered_json json_value(std::optional<double> v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

}  // namespace

std::string MetricsReport::to_csv() const {
  std::string out =
      fmt::format("keyword,n,p_at_{},p_at_n,eer,ap\n", k);
  std::size_t total_n = 0;
  for (const auto& m : keywords) {
    out += fmt::format("{},{},{},{},{},\n", m.keyword, m.n, fixed(m.p_at_k),
                       fixed(m.p_at_n), fixed(m.eer));
    total_n += m.n;
  }
  out += fmt::format("macro,{},{},{},{},\n", total_n, fixed(p_at_k),
                     fixed(p_at_n), fixed(eer));
  out += fmt::format("pooled,{},,,{},{}\n", total_n, fixed(pooled_eer),
                     fixed(ap));
  return out;
}

std::string MetricsReport::to_json() const {
  nlohmann::ordered_json j;
  j["scorer"] = scorer;
  j["k"] = k;
  j["evaluated_keywords"] = evaluated;
  j["macro"] = {{"p_at_k", p_at_k}, {"p_at_n", p_at_n}, {"eer", json_value(eer)}};
  j["pooled"] = {{"ap", ap}, {"eer", json_value(pooled_eer)}};
  auto& rows = j["keywords"] = nlohmann::ordered_json::array();
  for (const auto& m : keywords)
    rows.push_back({{"keyword", m.keyword},
                    {"n", m.n},
                    {"p_at_k", json_value(m.p_at_k)},
                    {"p_at_n", json_value(m.p_at_n)},
                    {"eer", json_value(m.eer)}});
  return j.dump(2) + "\n";
}

std::string MetricsReport::pr_curve_csv() const {
  std::string out = "threshold,precision,recall\n";
  for (const auto& p : pr_curve)
    out += fmt::format("{:.6f},{:.6f},{:.6f}\n", p.threshold, p.precision,
                       p.recall);
  return out;
}

namespace {

std::vector<char> relevance_column(const ScoreMatrix& scores,
                                   const ReferenceMap& references,
                                   std::string_view keyword,
                                   const RelevanceJudge& judge) {
  std::vector<char> rel(scores.ids.size());
  for (std::size_t r = 0; r < scores.ids.size(); ++r) {
    auto it = references.find(scores.ids[r]);
    if (it == references.end())
      throw ValidationError("no reference translation for '" + scores.ids[r] +
                            "'");
    rel[r] = judge.relevant(it->second, keyword) ? 1 : 0;
  }
  return rel;
}

}  // namespace

MetricsReport evaluate(const ScoreMatrix& scores, const ReferenceMap& references,
                       std::span<const std::string> keywords,
                       const RelevanceJudge& judge, const EvalOptions& options) {
  scores.validate();
  if (options.k == 0) throw ValidationError("k must be >= 1");
  if (keywords.empty()) throw ValidationError("no keywords to evaluate");

  MetricsReport report;
  report.scorer = scores.scorer;
  report.k = options.k;
  std::vector<double> pooled_scores;
  std::vector<char> pooled_rel;
  double sum_pk = 0, sum_pn = 0, sum_eer = 0;
  std::size_t eer_count = 0;
  for (const auto& keyword : keywords) {
    const std::size_t c = scores.column(keyword);
    const auto rel = relevance_column(scores, references, keyword, judge);
    const auto column = scores.column_values(c);
    pooled_scores.insert(pooled_scores.end(), column.begin(), column.end());
    pooled_rel.insert(pooled_rel.end(), rel.begin(), rel.end());

    KeywordMetrics m;
    m.keyword = keyword;
    IdSet relevant;
    for (std::size_t r = 0; r < rel.size(); ++r)
      if (rel[r]) relevant.insert(scores.ids[r]);
    m.n = relevant.size();
    if (m.n > 0) {
      std::vector<std::string> ranking;
      for (std::size_t r : ranked_rows(scores, c)) ranking.push_back(scores.ids[r]);
      m.p_at_k = precision_at_k(ranking, relevant, options.k);
      m.p_at_n = p_at_n(ranking, relevant);
      m.eer = eer(column, rel);
      sum_pk += *m.p_at_k;
      sum_pn += *m.p_at_n;
      ++report.evaluated;
      if (m.eer) {
        sum_eer += *m.eer;
        ++eer_count;
      }
    }
    report.keywords.push_back(std::move(m));
  }
  if (report.evaluated == 0)
    throw ValidationError("none of the keywords occurs in the references");
  report.p_at_k = sum_pk / static_cast<double>(report.evaluated);
  report.p_at_n = sum_pn / static_cast<double>(report.evaluated);
  if (eer_count) report.eer = sum_eer / static_cast<double>(eer_count);
  auto ap = average_precision(pooled_scores, pooled_rel);
  report.ap = ap.ap;
  report.pr_curve = std::move(ap.curve);
  if (options.pooled_eer) report.pooled_eer = eer(pooled_scores, pooled_rel);
  return report;
}

std::string rankings_csv(const ScoreMatrix& scores,
                         const ReferenceMap& references,
                         std::span<const std::string> keywords,
                         const RelevanceJudge& judge, std::size_t k) {
  std::string out = "keyword,rank,id,score,relevant,reference\n";
  for (const auto& keyword : keywords) {
    const std::size_t c = scores.column(keyword);
    const auto order = ranked_rows(scores, c);
    for (std::size_t i = 0; i < std::min(k, order.size()); ++i) {
      const auto& id = scores.ids[order[i]];
      auto it = references.find(id);
      std::string reference;
      bool rel = false;
      if (it != references.end()) {
        for (const auto& t : it->second)
          reference += (reference.empty() ? "" : " ") + t;
        rel = judge.relevant(it->second, keyword);
      }
      out += fmt::format("{},{},{},{:.6f},{},\"{}\"\n", keyword, i + 1, id,
                         scores.scores(order[i], c), rel ? 1 : 0, reference);
    }
  }
  return out;
}

ScoreMatrix score_collection(const Scorer& scorer,
                             std::span<const SearchItem> items,
                             std::size_t threads) {
  std::vector<std::pair<std::string, std::vector<double>>> rows(items.size());
  parallel_for(items.size(), threads, [&](std::size_t i) {
    try {
      rows[i] = {items[i].id, scorer.score(items[i].id, items[i].frames)};
    } catch (const std::exception& e) {
      throw Error("scoring utterance '" + items[i].id + "' with " +
                  scorer.name() + " failed: " + e.what());
    }
  });
  return ScoreMatrix::from_rows(scorer.name(), scorer.words(), std::move(rows));
}

}  // namespace xkws
