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
#include <iosfwd>
#include <span>
#include <string_view>

#include "xkws/matrix.hpp"

namespace xkws {

// Little-endian primitives shared by the frame and checkpoint formats.
namespace le {
void put_u8(std::ostream& out, std::uint8_t v);
void put_u32(std::ostream& out, std::uint32_t v);
void put_f32(std::ostream& out, std::span<const float> values);
std::uint8_t get_u8(std::istream& in);
std::uint32_t get_u32(std::istream& in);
void get_f32(std::istream& in, std::span<float> values);
void put_magic(std::ostream& out, std::string_view magic);
// Throws ParseError naming `what` when the next bytes differ from `magic`.
void expect_magic(std::istream& in, std::string_view magic,
                  std::string_view what);
}  // namespace le

inline constexpr std::string_view kFrameMagic = "KWSF";
inline constexpr std::uint8_t kFrameVersion = 1;

// "KWSF", u8 version, u32 T, u32 D, then T*D float32 row-major, all LE.
void write_frame_file(const std::filesystem::path& path,
                      const Matrix<float>& m);
Matrix<float> read_frame_file(const std::filesystem::path& path);

void write_frame_stream(std::ostream& out, const Matrix<float>& m);
Matrix<float> read_frame_stream(std::istream& in, std::string_view what);

}  // namespace xkws
