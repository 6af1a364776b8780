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

#include "xkws/checkpoint.hpp"

#include <fstream>
#include <json.hpp>

#include "xkws/binary_io.hpp"
#include "xkws/errors.hpp"

namespace xkws {

void write_checkpoint(const std::filesystem::path& path,
                      const NetworkParams<float>& params) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  le::put_magic(out, kModelMagic);
  le::put_u8(out, kModelVersion);
  le::put_u32(out, static_cast<std::uint32_t>(params.output_dim));
  le::put_u32(out, static_cast<std::uint32_t>(kNumLayers));
  for (const auto& layer : params.layers) {
    le::put_u8(out, static_cast<std::uint8_t>(layer.kind));
    le::put_u32(out, static_cast<std::uint32_t>(layer.outputs));
    le::put_u32(out, static_cast<std::uint32_t>(layer.in_channels));
    le::put_u32(out, static_cast<std::uint32_t>(layer.width));
    le::put_f32(out, layer.weight);
    le::put_f32(out, layer.bias);
  }
  if (!out) throw Error("failed writing " + path.string());
}

NetworkParams<float> read_checkpoint(const std::filesystem::path& path,
                                     std::size_t pool_width) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint " + path.string());
  const std::string what = path.string();
  le::expect_magic(in, kModelMagic, what);
  const auto version = le::get_u8(in);
  if (version != kModelVersion)
    throw ParseError(what + ": unsupported checkpoint version " +
                     std::to_string(version));
  NetworkParams<float> p;
  p.output_dim = le::get_u32(in);
  const auto count = le::get_u32(in);
  if (count != kNumLayers)
    throw ParseError(what + ": expected 5 layers, found " +
                     std::to_string(count));
  for (auto& layer : p.layers) {
    const auto kind = le::get_u8(in);
    if (kind > 1) throw ParseError(what + ": unknown layer kind");
    layer.kind = static_cast<LayerKind>(kind);
    layer.outputs = le::get_u32(in);
    layer.in_channels = le::get_u32(in);
    layer.width = le::get_u32(in);
    layer.weight.resize(layer.outputs * layer.fan_in());
    layer.bias.resize(layer.outputs);
    le::get_f32(in, layer.weight);
    le::get_f32(in, layer.bias);
  }
  p.arch.input_dim = p.layers[0].in_channels;
  for (std::size_t i = 0; i < 3; ++i)
    p.arch.conv[i] = {p.layers[i].outputs, p.layers[i].width};
  p.arch.hidden_units = p.layers[3].outputs;
  p.arch.pool_width = pool_width;
  p.validate();
  return p;
}

std::filesystem::path meta_path(const std::filesystem::path& checkpoint) {
  auto p = checkpoint;
  return p.replace_extension(".json");
}

void write_checkpoint_meta(const std::filesystem::path& path,
                           const CheckpointMeta& m) {
  nlohmann::ordered_json j;
  j["model"] = m.model;
  j["output_words"] = m.output_words;
  j["vocab_hash"] = m.vocab_hash;
  j["feature_hash"] = m.feature_hash;
  j["config_hash"] = m.config_hash;
  j["seed"] = m.seed;
  j["feature_mean"] = m.feature_mean;
  j["feature_stddev"] = m.feature_stddev;
  j["input_frames"] = m.input_frames;
  j["best_epoch"] = m.best_epoch;
  j["pool_width"] = m.pool_width;
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
}

CheckpointMeta read_checkpoint_meta(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open checkpoint metadata " + path.string());
  try {
    nlohmann::json j;
    in >> j;
    CheckpointMeta m;
    m.model = j.at("model").get<std::string>();
    m.output_words = j.at("output_words").get<std::vector<std::string>>();
    m.vocab_hash = j.at("vocab_hash").get<std::string>();
    m.feature_hash = j.at("feature_hash").get<std::string>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.feature_mean = j.at("feature_mean").get<std::vector<double>>();
    m.feature_stddev = j.at("feature_stddev").get<std::vector<double>>();
    m.input_frames = j.at("input_frames").get<std::size_t>();
    m.best_epoch = j.at("best_epoch").get<std::size_t>();
    m.pool_width = j.value("pool_width", std::size_t{3});
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace xkws
