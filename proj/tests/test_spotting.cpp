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
#include <cmath>
#include <numeric>
#include <random>

#include "xkws/errors.hpp"
#include "xkws/spotting.hpp"
#include "xkws/text.hpp"

using namespace xkws;

namespace {

struct Fraction {
  std::int64_t num = 0, den = 1;
  Fraction operator+(Fraction o) const {
    Fraction r{num * o.den + o.num * den, den * o.den};
    const auto g = std::gcd(r.num, r.den);
    return {r.num / g, r.den / g};
  }
  Fraction operator*(Fraction o) const {
    Fraction r{num * o.num, den * o.den};
    const auto g = std::gcd(r.num, r.den);
    return g == 0 ? Fraction{0, 1} : Fraction{r.num / g, r.den / g};
  }
  double value() const { return double(num) / double(den); }
};

// Sweep every distinct threshold a, predict score >= a, sum
// (recall step) * precision in exact arithmetic.
Fraction brute_force_ap(const std::vector<double>& s, const std::vector<char>& rel) {
  std::vector<double> thresholds(s.begin(), s.end());
  std::sort(thresholds.rbegin(), thresholds.rend());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  const std::int64_t total = std::count(rel.begin(), rel.end(), 1);
  Fraction ap;
  std::int64_t prev_tp = 0;
  for (double a : thresholds) {
    std::int64_t tp = 0, pred = 0;
    for (std::size_t i = 0; i < s.size(); ++i)
      if (s[i] >= a) {
        ++pred;
        tp += rel[i];
      }
    ap = ap + Fraction{tp - prev_tp, total} * Fraction{tp, pred};
    prev_tp = tp;
  }
  return ap;
}

ScoreMatrix matrix(std::vector<std::string> words,
                   std::vector<std::pair<std::string, std::vector<double>>> rows) {
  return ScoreMatrix::from_rows("test", std::move(words), std::move(rows));
}

const RelevanceJudge& identity_judge() {
  static const RelevanceJudge j(make_stemmer("identity"));
  return j;
}

}  // namespace

TEST_CASE("relevance compares stems") {
  const RelevanceJudge german(make_stemmer("german"));
  const std::vector<std::string> ref{"ein", "großer", "Hund"};
  CHECK(relevance(ref, "Hund", identity_judge()));
  CHECK(relevance(ref, "großen", german));
  CHECK_FALSE(relevance(ref, "großen", identity_judge()));
  CHECK_FALSE(relevance(ref, "Katze", german));
  for (const char* t : {"großen", "Hunde", "Männer", "laufen", "es", "Kinderen"})
    CHECK(german.stem(german.stem(t)) == german.stem(t));
}

TEST_CASE("rank orders by score then id") {
  const auto m = matrix({"w"}, {{"u2", {0.5}}, {"u1", {0.5}}, {"u3", {0.9}}, {"u0", {0.1}}});
  CHECK(rank(m, "w") == std::vector<std::string>{"u3", "u1", "u2", "u0"});
  CHECK_THROWS_AS(rank(m, "nope"), ValidationError);
  const auto permuted = matrix({"w"}, {{"u0", {0.1}}, {"u3", {0.9}}, {"u1", {0.5}}, {"u2", {0.5}}});
  CHECK(permuted == m);
  CHECK(rank(permuted, "w") == rank(m, "w"));
}

TEST_CASE("score matrix validation") {
  CHECK_THROWS_AS(matrix({"w"}, {{"a", {1}}, {"a", {2}}}), ValidationError);
  CHECK_THROWS(matrix({"w"}, {{"a", {1, 2}}}));
  CHECK_THROWS_AS(matrix({"w"}, {{"a", {NAN}}}), ValidationError);
  const auto m = matrix({"x", "y", "z"}, {{"a", {1, 2, 3}}});
  const std::vector<std::string> keep{"z", "x"};
  const auto r = m.restrict_to(keep);
  CHECK(r.words == keep);
  CHECK(r.scores(0, 0) == 3);
  CHECK(r.scores(0, 1) == 1);
}

TEST_CASE("precision at k and at n") {
  std::vector<std::string> ranking;
  for (int i = 0; i < 12; ++i) ranking.push_back("u" + std::to_string(i));
  const IdSet six{"u0", "u2", "u4", "u6", "u8", "u11"};
  CHECK(precision_at_k(ranking, IdSet{"u0", "u1", "u2", "u3", "u4", "u9"}, 10) ==
        doctest::Approx(0.6));
  CHECK(precision_at_k(ranking, six, 10) == doctest::Approx(0.5));
  CHECK_THROWS(precision_at_k(ranking, six, 0));
  const std::vector<std::string> short_ranking{"a", "b", "c"};
  CHECK(precision_at_k(short_ranking, IdSet{"a", "b", "c"}, 10) == doctest::Approx(0.3));
  CHECK(*p_at_n(short_ranking, IdSet{"a", "c", "z"}) == doctest::Approx(2.0 / 3));
  CHECK(*p_at_n(short_ranking, IdSet{"a", "b"}) == 1.0);
  CHECK_FALSE(p_at_n(short_ranking, IdSet{}).has_value());
}

TEST_CASE("equal error rate by hand") {
  const std::vector<double> s{0.9, 0.7, 0.4, 0.2};
  CHECK(*eer(s, std::vector<char>{1, 1, 0, 0}) == 0.0);
  CHECK(*eer(s, std::vector<char>{0, 0, 1, 1}) == 1.0);
  const std::vector<double> flat(7, 0.3);
  CHECK(*eer(flat, std::vector<char>{1, 0, 0, 1, 0, 0, 0}) == 0.5);
  CHECK_FALSE(eer(s, std::vector<char>{1, 1, 1, 1}).has_value());
  CHECK_FALSE(eer(s, std::vector<char>{0, 0, 0, 0}).has_value());
  // One swap: [1,0,1,0]. FAR/FRR after each step: (0,.5) (.5,.5) ...
  CHECK(*eer(s, std::vector<char>{1, 0, 1, 0}) == doctest::Approx(0.5));
  // Crossing inside a step: [1,0,0] at t=0.9 gives (0,0), perfect.
  // [0,1] -> first step (1,1)? FAR 1 FRR 1 after accepting the negative: 1.
  CHECK(*eer(std::vector<double>{0.8, 0.1}, std::vector<char>{0, 1}) == 1.0);
}

TEST_CASE("average precision by hand") {
  const auto r = average_precision(std::vector<double>{0.9, 0.8, 0.3},
                                   std::vector<char>{1, 0, 1});
  CHECK(r.ap == doctest::Approx(5.0 / 6));
  REQUIRE(r.curve.size() == 3);
  CHECK(r.curve[0].threshold == 0.9);
  CHECK(r.curve[2].recall == 1.0);
  CHECK(average_precision(std::vector<double>{0.1, 0.5, 0.2}, std::vector<char>{1, 1, 1}).ap == 1.0);
  CHECK(average_precision(std::vector<double>{0.9, 0.1}, std::vector<char>{1, 0}).ap == 1.0);
  // A tie block with one relevant of two: precision 1/2 at recall 1.
  CHECK(average_precision(std::vector<double>{0.5, 0.5}, std::vector<char>{0, 1}).ap == 0.5);
  CHECK_THROWS(average_precision(std::vector<double>{0.5}, std::vector<char>{0}));
}

TEST_CASE("tie-block AP equals an exact brute-force threshold sweep") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + rng() % 12;
    std::vector<double> s(n);
    std::vector<char> rel(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = double(rng() % 5) / 4.0;  // plenty of ties
      rel[i] = char(rng() % 2);
    }
    if (std::count(rel.begin(), rel.end(), 1) == 0) rel[0] = 1;
    const double fast = average_precision(s, rel).ap;
    const double exact = brute_force_ap(s, rel).value();
    CAPTURE(trial);
    CHECK(std::abs(fast - exact) <= 1e-15);
  }
}

TEST_CASE("ranking metrics are invariant under monotone maps and row order") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::vector<std::string> words{"a", "b", "c"};
  std::vector<std::pair<std::string, std::vector<double>>> rows;
  ReferenceMap refs;
  for (int i = 0; i < 40; ++i) {
    const std::string id = "utt" + std::to_string(i);
    rows.push_back({id, {std::round(u(rng) * 8) / 8, u(rng), u(rng)}});
    std::vector<std::string> ref;
    for (const auto& w : words)
      if (u(rng) < 0.3) ref.push_back(w);
    ref.push_back("filler");
    refs[id] = ref;
  }
  const auto base = evaluate(matrix(words, rows), refs, words, identity_judge());

  for (int t = 0; t < 5; ++t) {
    const double a = 0.5 + u(rng) * 3, b = u(rng) - 0.5;
    auto mapped = rows;
    for (auto& [id, v] : mapped)
      for (double& x : v) x = std::exp(a * x) + b;  // strictly increasing
    std::shuffle(mapped.begin(), mapped.end(), rng);
    const auto m = evaluate(matrix(words, mapped), refs, words, identity_judge());
    for (std::size_t k = 0; k < words.size(); ++k) {
      CHECK(m.keywords[k].p_at_k == base.keywords[k].p_at_k);
      CHECK(m.keywords[k].p_at_n == base.keywords[k].p_at_n);
      CHECK(*m.keywords[k].eer == doctest::Approx(*base.keywords[k].eer).epsilon(1e-12));
    }
    const auto ids = matrix(words, mapped).ids;
    CHECK(rank(matrix(words, mapped), "b") == rank(matrix(words, rows), "b"));
  }
  auto shuffled = rows;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  CHECK(evaluate(matrix(words, shuffled), refs, words, identity_judge()).to_csv() ==
        base.to_csv());
  CHECK(base.ap >= 0);
  CHECK(base.ap <= 1);
}

TEST_CASE("evaluate: oracle, prior-like, absent keywords and errors") {
  const std::vector<std::string> words{"hund", "katze", "vogel"};
  ReferenceMap refs{{"a", {"hund"}}, {"b", {"katze", "hund"}}, {"c", {"baum"}},
                    {"d", {"katze"}}};
  std::vector<std::pair<std::string, std::vector<double>>> oracle;
  for (const auto& [id, ref] : refs) {
    std::vector<double> row;
    for (const auto& w : words)
      row.push_back(std::find(ref.begin(), ref.end(), w) != ref.end() ? 1.0 : 0.0);
    oracle.push_back({id, row});
  }
  EvalOptions opt;
  opt.k = 2;
  opt.pooled_eer = true;
  const auto r = evaluate(matrix(words, oracle), refs, words, identity_judge(), opt);
  CHECK(r.evaluated == 2);
  CHECK(r.p_at_k == 1.0);
  CHECK(r.p_at_n == 1.0);
  CHECK(*r.eer == 0.0);
  CHECK(r.ap == 1.0);
  CHECK(*r.pooled_eer == 0.0);
  CHECK(r.keywords[2].n == 0);
  CHECK_FALSE(r.keywords[2].p_at_k.has_value());
  const auto csv = r.to_csv();
  CHECK(csv.rfind("keyword,n,p_at_2,p_at_n,eer,ap\n", 0) == 0);
  CHECK(csv.find("vogel,0,,,,\n") != std::string::npos);
  CHECK(csv.find("macro,") != std::string::npos);
  CHECK(r.to_json().find("\"ap\"") != std::string::npos);
  CHECK(r.pr_curve_csv().rfind("threshold,precision,recall\n", 0) == 0);

  std::vector<std::pair<std::string, std::vector<double>>> flat;
  for (const auto& [id, ref] : refs) flat.push_back({id, {0.4, 0.1, 0.2}});
  const auto p = evaluate(matrix(words, flat), refs, words, identity_judge());
  CHECK(*p.eer == 0.5);

  auto missing = refs;
  missing.erase("c");
  try {
    evaluate(matrix(words, oracle), missing, words, identity_judge());
    FAIL("expected a throw");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("'c'") != std::string::npos);
  }
  const std::vector<std::string> unknown{"fisch"};
  CHECK_THROWS(evaluate(matrix(words, oracle), refs, unknown, identity_judge()));
  const std::vector<std::string> absent{"vogel"};
  CHECK_THROWS(evaluate(matrix(words, oracle), refs, absent, identity_judge()));

  const auto rk = rankings_csv(matrix(words, oracle), refs, words, identity_judge(), 2);
  CHECK(rk.rfind("keyword,rank,id,score,relevant,reference\n", 0) == 0);
  CHECK(rk.find("hund,1,a,") != std::string::npos);
}

namespace {
class FailingScorer : public Scorer {
 public:
  std::string name() const override { return "failing"; }
  const std::vector<std::string>& words() const override { return words_; }
  std::vector<double> score(std::string_view id, const FrameMatrix&) const override {
    if (id == "bad") throw ValidationError("boom");
    return {id == "x" ? 0.25 : 0.75};
  }
 private:
  std::vector<std::string> words_{"w"};
};
}  // namespace

TEST_CASE("score_collection is deterministic and names failures") {
  FailingScorer s;
  std::vector<SearchItem> items{{"y", {}}, {"x", {}}};
  const auto a = score_collection(s, items, 1);
  const auto b = score_collection(s, items, 2);
  CHECK(a == b);
  CHECK(a.ids == std::vector<std::string>{"x", "y"});
  CHECK(a.scores(0, 0) == 0.25);
  items.push_back({"bad", {}});
  try {
    score_collection(s, items, 2);
    FAIL("expected a throw");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("bad") != std::string::npos);
  }
}
