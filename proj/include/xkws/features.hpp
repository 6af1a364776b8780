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

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "xkws/matrix.hpp"

namespace xkws {

inline constexpr std::size_t kStaticDim = 13;
inline constexpr std::size_t kFeatureDim = 39;

// T x D acoustic frames, one row per hop.
struct FrameMatrix {
  Matrix<float> frames;
  double frame_rate = 100.0;

  std::size_t num_frames() const { return frames.rows(); }
  std::size_t dim() const { return frames.cols(); }

  // Throws ValidationError unless T >= 1, D in {13, 39}, all entries finite.
  void validate() const;
};

struct FeatureConfig {
  double sample_rate = 16000.0;
  double window_length = 0.025;
  double hop_length = 0.010;
  std::size_t num_mel_filters = 23;
  std::size_t num_cepstra = 13;
  double pre_emphasis = 0.97;
  double log_floor = 1e-10;
  std::size_t delta_window = 2;

  void validate() const;
  std::size_t window_samples() const;
  std::size_t hop_samples() const;
  std::size_t fft_size() const;  // next power of two >= window_samples
};

// floor((num_samples - window) / hop) + 1, or 0 when shorter than a window.
std::size_t mfcc_frame_count(std::size_t num_samples, const FeatureConfig& c);

// Triangular mel filters over the fft_size()/2 + 1 magnitude bins.
// Row m is filter m; mel(f) = 2595 log10(1 + f / 700).
Matrix<double> mel_filterbank(const FeatureConfig& config);

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Pre-emphasis, framing, Hamming window, |FFT|, mel filterbank and log with
// floor. Returns T x num_mel_filters.
Matrix<double> log_mel_energies(std::span<const float> waveform,
                                const FeatureConfig& config);

// log_mel_energies followed by an orthonormal DCT-II keeping c0..c12.
FrameMatrix extract_mfcc(std::span<const float> waveform,
                         const FeatureConfig& config);

// [static | delta | delta-delta] using the regression formula over
// +-delta_window frames with edge replication.
FrameMatrix append_deltas(const FrameMatrix& mfcc, std::size_t delta_window = 2);

// Truncates to max_frames or zero-pads up to min_frames.
FrameMatrix fit_length(const FrameMatrix& frames, std::size_t max_frames,
                       std::size_t min_frames);

// Per-dimension mean and standard deviation.
struct FeatureStats {
  std::vector<double> mean;
  std::vector<double> stddev;

  static FeatureStats compute(std::span<const FrameMatrix* const> frames);
  void apply(FrameMatrix& frames) const;
};

struct Waveform {
  std::vector<float> samples;  // first channel, scaled to [-1, 1]
  double sample_rate = 0.0;
};

// RIFF/WAVE with 16-bit PCM or 32-bit float samples.
Waveform read_wav(const std::filesystem::path& path);
void write_wav(const std::filesystem::path& path, const Waveform& wave);

}  // namespace xkws
