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

#include <set>

#include "xkws/errors.hpp"
#include "xkws/text.hpp"

using namespace xkws;

TEST_CASE("german stemmer groups inflections") {
  CHECK(german_stem("großen") == german_stem("groß"));
  CHECK(german_stem("Hunde") == german_stem("Hund"));
  CHECK(german_stem("Hunden") == "hund");
  CHECK(german_stem("Kindes") == german_stem("Kind"));
  CHECK(german_stem("Männer") == "män");
  CHECK(german_stem("Ball") == "ball");
}

TEST_CASE("german stemmer keeps at least three code points") {
  CHECK(german_stem("es") == "es");
  CHECK(german_stem("Ente") == "ent");
  CHECK(german_stem("Rosen") == "ros");
  // 'ü' is two bytes but one code point.
  CHECK(german_stem("Tüte") == "tüt");
}

TEST_CASE("stemmers are idempotent") {
  const char* tokens[] = {"großen", "Hunden", "Leute",  "rennt",  "Straßen",
                          "Wiesen", "Kinder", "Spieler", "Hündchen", "Ozeane",
                          "seeen",  "Äpfeln", "x",       ""};
  for (const char* t : tokens) {
    CAPTURE(t);
    CHECK(german_stem(german_stem(t)) == german_stem(t));
    CHECK(identity_stem(identity_stem(t)) == identity_stem(t));
  }
}

TEST_CASE("stemmer factory") {
  CHECK(make_stemmer("identity")("Hunde") == "Hunde");
  CHECK(make_stemmer("german")("Hunde") == "hund");
  CHECK_THROWS_AS(make_stemmer("porter"), ValidationError);
}

TEST_CASE("utf8 length and whitespace split") {
  CHECK(utf8_length("groß") == 4);
  CHECK(utf8_length("") == 0);
  const auto parts = split_whitespace("  ein  Hund\tläuft\n");
  REQUIRE(parts.size() == 3);
  CHECK(parts[2] == "läuft");
  CHECK(split_whitespace("   ").empty());
}

TEST_CASE("hashing and seed mixing") {
  // FNV-1a 64 reference values.
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(hex64(0xabcULL) == "0000000000000abc");
  std::set<std::uint64_t> seeds;
  for (const char* s : {"corpus", "init", "shuffle", "tagger"}) {
    seeds.insert(mix_seed(1, s));
    CHECK(mix_seed(1, s) == mix_seed(1, s));
  }
  CHECK(seeds.size() == 4);
  CHECK(mix_seed(1, "init") != mix_seed(2, "init"));
}
