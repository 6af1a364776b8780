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

#include "xkws/text.hpp"

#include <array>
#include <cctype>
#include <cstdio>

#include "xkws/errors.hpp"

namespace xkws {
namespace {

std::string lowercase_german(std::string_view token) {
  std::string out;
  out.reserve(token.size());
  for (std::size_t i = 0; i < token.size(); ++i) {
    const auto c = static_cast<unsigned char>(token[i]);
    // U+00C4, U+00D6, U+00DC are 0xC3 0x84/0x96/0x9C; lower case adds 0x20.
    if (c == 0xC3 && i + 1 < token.size()) {
      const auto d = static_cast<unsigned char>(token[i + 1]);
      out.push_back(token[i]);
      out.push_back(static_cast<char>(
          (d == 0x84 || d == 0x96 || d == 0x9C) ? d + 0x20 : d));
      ++i;
      continue;
    }
    out.push_back(static_cast<char>(c >= 'A' && c <= 'Z' ? c + 32 : c));
  }
  return out;
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() &&
         s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace

std::string identity_stem(std::string_view token) { return std::string(token); }

std::string german_stem(std::string_view token) {
  static constexpr std::array<std::string_view, 6> kSuffixes{"en", "er", "es",
                                                             "e",  "n",  "s"};
  constexpr std::size_t kMinStem = 3;
  std::string s = lowercase_german(token);
  for (bool changed = true; changed;) {
    changed = false;
    for (std::string_view suffix : kSuffixes) {
      if (!ends_with(s, suffix)) continue;
      std::string_view rest(s.data(), s.size() - suffix.size());
      if (utf8_length(rest) < kMinStem) continue;
      s.resize(rest.size());
      changed = true;
      break;
    }
  }
  return s;
}

Stemmer make_stemmer(std::string_view name) {
  if (name == "identity") return identity_stem;
  if (name == "german") return german_stem;
  throw ValidationError("unknown stemmer '" + std::string(name) +
                        "' (expected identity or german)");
}

std::size_t utf8_length(std::string_view s) {
  std::size_t n = 0;
  for (char c : s)
    if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++n;
  return n;
}

std::vector<std::string> split_whitespace(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t mix_seed(std::uint64_t seed, std::string_view stream) {
  std::uint64_t z = seed ^ fnv1a64(stream);
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace xkws
