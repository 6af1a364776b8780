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

#include "xkws/binary_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "xkws/errors.hpp"

namespace xkws {
namespace le {

void put_u8(std::ostream& out, std::uint8_t v) {
  out.put(static_cast<char>(v));
}

void put_u32(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> bytes{
      static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
      static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(bytes.data(), bytes.size());
}

void put_f32(std::ostream& out, std::span<const float> values) {
  for (float f : values) put_u32(out, std::bit_cast<std::uint32_t>(f));
}

std::uint8_t get_u8(std::istream& in) {
  char c;
  if (!in.get(c)) throw ParseError("unexpected end of binary data");
  return static_cast<std::uint8_t>(c);
}

std::uint32_t get_u32(std::istream& in) {
  std::array<unsigned char, 4> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), 4))
    throw ParseError("unexpected end of binary data");
  return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) |
         (std::uint32_t(b[2]) << 16) | (std::uint32_t(b[3]) << 24);
}

void get_f32(std::istream& in, std::span<float> values) {
  for (float& f : values) f = std::bit_cast<float>(get_u32(in));
}

void put_magic(std::ostream& out, std::string_view magic) {
  out.write(magic.data(), static_cast<std::streamsize>(magic.size()));
}

void expect_magic(std::istream& in, std::string_view magic,
                  std::string_view what) {
  std::string got(magic.size(), '\0');
  if (!in.read(got.data(), static_cast<std::streamsize>(got.size())) ||
      got != magic)
    throw ParseError(std::string(what) + ": bad magic, expected '" +
                     std::string(magic) + "'");
}

}  // namespace le

void write_frame_stream(std::ostream& out, const Matrix<float>& m) {
  le::put_magic(out, kFrameMagic);
  le::put_u8(out, kFrameVersion);
  le::put_u32(out, static_cast<std::uint32_t>(m.rows()));
  le::put_u32(out, static_cast<std::uint32_t>(m.cols()));
  le::put_f32(out, m.values());
}

Matrix<float> read_frame_stream(std::istream& in, std::string_view what) {
  le::expect_magic(in, kFrameMagic, what);
  const auto version = le::get_u8(in);
  if (version != kFrameVersion)
    throw ParseError(std::string(what) + ": unsupported version " +
                     std::to_string(version));
  const std::uint32_t rows = le::get_u32(in);
  const std::uint32_t cols = le::get_u32(in);
  const auto needed = static_cast<std::streamoff>(rows) * cols * 4;
  if (const auto here = in.tellg(); here != std::streampos(-1)) {
    in.seekg(0, std::ios::end);
    const auto available = in.tellg() - here;
    in.seekg(here);
    if (available < needed)
      throw ParseError(std::string(what) + ": truncated payload");
  }
  Matrix<float> m(rows, cols);
  try {
    le::get_f32(in, m.values());
  } catch (const ParseError&) {
    throw ParseError(std::string(what) + ": truncated payload");
  }
  return m;
}

void write_frame_file(const std::filesystem::path& path,
                      const Matrix<float>& m) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_frame_stream(out, m);
  if (!out) throw Error("failed writing " + path.string());
}

Matrix<float> read_frame_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return read_frame_stream(in, path.string());
}

}  // namespace xkws
