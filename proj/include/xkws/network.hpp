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

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "xkws/features.hpp"
#include "xkws/matrix.hpp"

namespace xkws {

struct ConvSpec {
  std::size_t filters = 0;
  std::size_t width = 0;
  friend bool operator==(const ConvSpec&, const ConvSpec&) = default;
};

// conv(64, 9) relu pool(3), conv(256, 10) relu pool(3), conv(1024, 11) relu,
// global max pool, dense(3000) relu, dense(W) sigmoid. Convolutions are
// valid with stride 1; pooling is non-overlapping and drops the remainder.
// Channel counts are adjustable so gradient checks can run on a miniature
// copy with identical length arithmetic.
struct Architecture {
  std::size_t input_dim = kFeatureDim;
  std::array<ConvSpec, 3> conv{{{64, 9}, {256, 10}, {1024, 11}}};
  std::size_t pool_width = 3;
  std::size_t hidden_units = 3000;

  // Lengths after conv1, pool1, conv2, pool2 and conv3; zeros once the
  // input is too short.
  std::array<std::size_t, 5> lengths(std::size_t frames) const;
  // Smallest input length whose final convolution has length >= 1.
  std::size_t min_input_frames() const;

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

inline constexpr std::size_t kMinInputFrames = 134;

enum class LayerKind : std::uint8_t { kConv = 0, kDense = 1 };

inline constexpr std::size_t kNumLayers = 5;
inline constexpr std::array<std::string_view, kNumLayers> kLayerNames{
    "conv1", "conv2", "conv3", "hidden", "output"};

// Weights are row-major outputs x (width * in_channels); a convolution
// filter row is laid out time-major to match a window of input rows.
template <typename Real>
struct Layer {
  LayerKind kind = LayerKind::kDense;
  std::size_t outputs = 0;
  std::size_t in_channels = 0;
  std::size_t width = 1;
  std::vector<Real> weight;
  std::vector<Real> bias;

  std::size_t fan_in() const { return in_channels * width; }
  friend bool operator==(const Layer&, const Layer&) = default;
};

template <typename Real>
struct NetworkParams {
  Architecture arch;
  std::size_t output_dim = 0;
  std::array<Layer<Real>, kNumLayers> layers;
  // Bumped by every in-place update so stale forward traces are detected.
  std::uint64_t revision = 0;

  std::size_t parameter_count() const;
  bool same_shape(const NetworkParams& other) const;
  void validate() const;
  friend bool operator==(const NetworkParams& a, const NetworkParams& b) {
    return a.arch == b.arch && a.output_dim == b.output_dim &&
           a.layers == b.layers;
  }
};

// Gradients share the parameter layout.
template <typename Real>
using Gradients = NetworkParams<Real>;

// He initialisation: N(0, 2 / fan_in) weights, zero biases.
template <typename Real>
NetworkParams<Real> init_params(const Architecture& arch,
                                std::size_t output_dim, std::uint64_t seed);

template <typename Real>
Gradients<Real> zero_gradients(const NetworkParams<Real>& params);

template <typename To, typename From>
NetworkParams<To> convert_params(const NetworkParams<From>& params);

template <typename Real>
struct ForwardTrace {
  std::uint64_t revision = 0;
  std::size_t output_dim = 0;
  Matrix<Real> input;
  std::array<Matrix<Real>, 3> conv_out;  // after ReLU
  std::array<Matrix<Real>, 2> pool_out;
  std::array<std::vector<std::uint32_t>, 2> pool_argmax;  // source rows
  std::vector<Real> global_out;
  std::vector<std::uint32_t> global_argmax;
  std::vector<Real> hidden;  // after ReLU
  std::vector<Real> logits;
  std::vector<Real> scores;  // sigmoid(logits), strictly inside (0, 1)
};

// Throws LengthError below arch.min_input_frames(), DimensionError on a
// wrong feature dimension and ValidationError on non-finite input.
template <typename Real>
ForwardTrace<Real> forward(const NetworkParams<Real>& params,
                           const Matrix<Real>& frames);

// Summed binary cross-entropy; scores are clamped to [1e-12, 1 - 1e-12].
template <typename Real>
double summed_cross_entropy(std::span<const Real> scores,
                            std::span<const Real> target);

// Accumulates loss_scale * d(loss)/d(theta) into grads. The output-layer
// error is loss_scale * (f - y). Max-pool ties route to the earliest row.
template <typename Real>
void backward(const NetworkParams<Real>& params, const ForwardTrace<Real>& trace,
              std::span<const Real> target, Real loss_scale,
              Gradients<Real>& grads);

}  // namespace xkws
