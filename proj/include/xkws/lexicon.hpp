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

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace xkws {

// Search-language word -> query-language translations. The first
// translation of each entry is its primary one; the rest are synonyms.
class TranslationLexicon {
 public:
  void add(const std::string& search_word, const std::string& query_word);

  bool contains(std::string_view search_word) const;
  // Throws ValidationError for an unknown word.
  const std::vector<std::string>& translations(
      std::string_view search_word) const;
  const std::string& primary(std::string_view search_word) const;

  const std::map<std::string, std::vector<std::string>, std::less<>>&
  entries() const {
    return entries_;
  }
  std::size_t size() const { return entries_.size(); }

  // Sorted, de-duplicated query-language side.
  std::vector<std::string> query_words() const;

  void validate() const;

  friend bool operator==(const TranslationLexicon&,
                         const TranslationLexicon&) = default;

 private:
  std::map<std::string, std::vector<std::string>, std::less<>> entries_;
};

// JSON object {"search word": ["query", ...], ...}.
void write_lexicon(const std::filesystem::path& path,
                   const TranslationLexicon& lexicon);
TranslationLexicon read_lexicon(const std::filesystem::path& path);

}  // namespace xkws
