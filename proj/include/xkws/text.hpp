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
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace xkws {

// Maps a token to its stem. Must be deterministic and idempotent.
using Stemmer = std::function<std::string(std::string_view)>;

std::string identity_stem(std::string_view token);

// Lower-cases (ASCII and German umlauts), then strips the suffixes
// -en -er -es -e -n -s until none applies or the stem would drop below
// three characters. Iterating to a fixed point makes it idempotent.
std::string german_stem(std::string_view token);

// "identity" or "german".
Stemmer make_stemmer(std::string_view name);

// Number of UTF-8 code points.
std::size_t utf8_length(std::string_view s);

std::vector<std::string> split_whitespace(std::string_view s);

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

// SplitMix64 finalizer; derives independent sub-seeds from one seed.
std::uint64_t mix_seed(std::uint64_t seed, std::string_view stream);

}  // namespace xkws
