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

#include "xkws/lexicon.hpp"

#include <algorithm>
#include <fstream>
#include <json.hpp>

#include "xkws/errors.hpp"

namespace xkws {

void TranslationLexicon::add(const std::string& search_word,
                             const std::string& query_word) {
  auto& list = entries_[search_word];
  if (std::find(list.begin(), list.end(), query_word) == list.end())
    list.push_back(query_word);
}

bool TranslationLexicon::contains(std::string_view search_word) const {
  return entries_.find(search_word) != entries_.end();
}

const std::vector<std::string>& TranslationLexicon::translations(
    std::string_view search_word) const {
  auto it = entries_.find(search_word);
  if (it == entries_.end())
    throw ValidationError("lexicon has no entry for '" +
                          std::string(search_word) + "'");
  return it->second;
}

const std::string& TranslationLexicon::primary(
    std::string_view search_word) const {
  return translations(search_word).front();
}

std::vector<std::string> TranslationLexicon::query_words() const {
  std::vector<std::string> out;
  for (const auto& [_, list] : entries_)
    out.insert(out.end(), list.begin(), list.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void TranslationLexicon::validate() const {
  for (const auto& [word, list] : entries_)
    if (list.empty())
      throw ValidationError("lexicon entry '" + word + "' has no translation");
}

void write_lexicon(const std::filesystem::path& path,
                   const TranslationLexicon& lexicon) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [word, list] : lexicon.entries()) j[word] = list;
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
}

TranslationLexicon read_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw ParseError(path.string() + ": expected an object");
  TranslationLexicon lex;
  for (const auto& [word, list] : j.items()) {
    if (!list.is_array() || list.empty())
      throw ParseError(path.string() + ": entry '" + word +
                       "' needs a non-empty list");
    for (const auto& q : list) lex.add(word, q.get<std::string>());
  }
  return lex;
}

}  // namespace xkws
