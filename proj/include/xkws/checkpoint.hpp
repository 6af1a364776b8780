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
#include <string>
#include <vector>

#include "xkws/network.hpp"

namespace xkws {

inline constexpr std::string_view kModelMagic = "KWSM";
inline constexpr std::uint8_t kModelVersion = 1;

// "KWSM", u8 version, u32 W, u32 layer count, then per layer a header
// (u8 kind, u32 outputs, u32 in_channels, u32 width) followed by the weights
// and biases as little-endian float32. Pooling width is not stored; the
// architecture fixes it.
void write_checkpoint(const std::filesystem::path& path,
                      const NetworkParams<float>& params);
NetworkParams<float> read_checkpoint(const std::filesystem::path& path,
                                     std::size_t pool_width = 3);

struct CheckpointMeta {
  std::string model;
  std::vector<std::string> output_words;
  std::string vocab_hash;
  std::string feature_hash;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<double> feature_mean;
  std::vector<double> feature_stddev;
  std::size_t input_frames = 0;
  std::size_t best_epoch = 0;
  std::size_t pool_width = 3;
};

// model.kwsm -> model.json
std::filesystem::path meta_path(const std::filesystem::path& checkpoint);
void write_checkpoint_meta(const std::filesystem::path& path,
                           const CheckpointMeta& meta);
CheckpointMeta read_checkpoint_meta(const std::filesystem::path& path);

}  // namespace xkws
