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

#include "xkws/features.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>

#include "xkws/binary_io.hpp"
#include "xkws/errors.hpp"

namespace xkws {
namespace {

// FFTW planning is not thread-safe; execution on distinct arrays is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwPlanDeleter {
  void operator()(fftw_plan_s* p) const {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(p);
  }
};
using FftwPlan = std::unique_ptr<fftw_plan_s, FftwPlanDeleter>;

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

}  // namespace

void FrameMatrix::validate() const {
  if (frames.rows() < 1) throw ValidationError("frame matrix has no frames");
  if (frames.cols() != kStaticDim && frames.cols() != kFeatureDim)
    throw ValidationError("frame matrix dimension " +
                          std::to_string(frames.cols()) +
                          " is neither 13 nor 39");
  for (float v : frames.values())
    if (!std::isfinite(v))
      throw ValidationError("frame matrix contains a non-finite value");
}

void FeatureConfig::validate() const {
  if (!(sample_rate > 0)) throw ValidationError("sample_rate must be positive");
  if (!(hop_length > 0) || !(window_length > hop_length))
    throw ValidationError("need window_length > hop_length > 0");
  if (num_cepstra == 0 || num_cepstra > num_mel_filters)
    throw ValidationError("need 0 < num_cepstra <= num_mel_filters");
  if (!(log_floor > 0)) throw ValidationError("log_floor must be positive");
  if (window_samples() < 2) throw ValidationError("window is too short");
}

std::size_t FeatureConfig::window_samples() const {
  return static_cast<std::size_t>(std::lround(window_length * sample_rate));
}

std::size_t FeatureConfig::hop_samples() const {
  return static_cast<std::size_t>(std::lround(hop_length * sample_rate));
}

std::size_t FeatureConfig::fft_size() const {
  return std::bit_ceil(window_samples());
}

std::size_t mfcc_frame_count(std::size_t num_samples, const FeatureConfig& c) {
  const std::size_t win = c.window_samples();
  if (num_samples < win) return 0;
  return (num_samples - win) / c.hop_samples() + 1;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

Matrix<double> mel_filterbank(const FeatureConfig& config) {
  const std::size_t bins = config.fft_size() / 2 + 1;
  const std::size_t m = config.num_mel_filters;
  const double top = hz_to_mel(config.sample_rate / 2.0);
  std::vector<double> edges(m + 2);
  for (std::size_t i = 0; i < edges.size(); ++i)
    edges[i] = mel_to_hz(top * static_cast<double>(i) / (m + 1));

  Matrix<double> fb(m, bins);
  for (std::size_t f = 0; f < m; ++f) {
    const double lo = edges[f], mid = edges[f + 1], hi = edges[f + 2];
    for (std::size_t k = 0; k < bins; ++k) {
      const double hz = static_cast<double>(k) * config.sample_rate /
                        static_cast<double>(config.fft_size());
      double w = 0.0;
      if (hz > lo && hz <= mid) w = (hz - lo) / (mid - lo);
      else if (hz > mid && hz < hi) w = (hi - hz) / (hi - mid);
      fb(f, k) = w;
    }
  }
  return fb;
}

Matrix<double> log_mel_energies(std::span<const float> waveform,
                                const FeatureConfig& config) {
  config.validate();
  const std::size_t win = config.window_samples();
  const std::size_t hop = config.hop_samples();
  if (waveform.size() < win)
    throw ValidationError("waveform has " + std::to_string(waveform.size()) +
                          " samples, shorter than one " + std::to_string(win) +
                          "-sample window");
  for (float s : waveform)
    if (!std::isfinite(s))
      throw ValidationError("waveform contains a non-finite sample");

  std::vector<double> emphasized(waveform.size());
  emphasized[0] = waveform[0];
  for (std::size_t i = 1; i < waveform.size(); ++i)
    emphasized[i] = waveform[i] - config.pre_emphasis * waveform[i - 1];

  std::vector<double> hamming(win);
  for (std::size_t n = 0; n < win; ++n)
    hamming[n] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * n / (win - 1));

  const std::size_t nfft = config.fft_size();
  const std::size_t bins = nfft / 2 + 1;
  std::unique_ptr<double, FftwFree> in(
      static_cast<double*>(fftw_malloc(sizeof(double) * nfft)));
  std::unique_ptr<fftw_complex, FftwFree> out(
      static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * bins)));
  FftwPlan plan;
  {
    std::lock_guard lock(fftw_planner_mutex());
    plan.reset(fftw_plan_dft_r2c_1d(static_cast<int>(nfft), in.get(),
                                    out.get(), FFTW_ESTIMATE));
  }

  const Matrix<double> fb = mel_filterbank(config);
  const std::size_t frames = mfcc_frame_count(waveform.size(), config);
  Matrix<double> energies(frames, config.num_mel_filters);
  std::vector<double> magnitude(bins);
  for (std::size_t t = 0; t < frames; ++t) {
    double* buf = in.get();
    std::fill(buf, buf + nfft, 0.0);
    for (std::size_t n = 0; n < win; ++n)
      buf[n] = emphasized[t * hop + n] * hamming[n];
    fftw_execute(plan.get());
    for (std::size_t k = 0; k < bins; ++k)
      magnitude[k] = std::hypot(out.get()[k][0], out.get()[k][1]);
    for (std::size_t m = 0; m < fb.rows(); ++m) {
      double e = 0.0;
      for (std::size_t k = 0; k < bins; ++k) e += fb(m, k) * magnitude[k];
      energies(t, m) = std::log(std::max(e, config.log_floor));
    }
  }
  return energies;
}

FrameMatrix extract_mfcc(std::span<const float> waveform,
                         const FeatureConfig& config) {
  const Matrix<double> energies = log_mel_energies(waveform, config);
  const std::size_t m = config.num_mel_filters;
  const std::size_t keep = config.num_cepstra;
  Matrix<double> dct(keep, m);
  for (std::size_t i = 0; i < keep; ++i) {
    const double scale = std::sqrt((i == 0 ? 1.0 : 2.0) / m);
    for (std::size_t j = 0; j < m; ++j)
      dct(i, j) = scale * std::cos(std::numbers::pi * i * (j + 0.5) / m);
  }
  FrameMatrix out;
  out.frame_rate = 1.0 / config.hop_length;
  out.frames = Matrix<float>(energies.rows(), keep);
  for (std::size_t t = 0; t < energies.rows(); ++t) {
    for (std::size_t i = 0; i < keep; ++i) {
      double c = 0.0;
      for (std::size_t j = 0; j < m; ++j) c += dct(i, j) * energies(t, j);
      out.frames(t, i) = static_cast<float>(c);
    }
  }
  return out;
}

namespace {

Matrix<float> regression_deltas(const Matrix<float>& x, std::size_t window) {
  const auto t_max = static_cast<std::ptrdiff_t>(x.rows()) - 1;
  double denom = 0.0;
  for (std::size_t n = 1; n <= window; ++n) denom += 2.0 * n * n;
  Matrix<float> d(x.rows(), x.cols());
  for (std::ptrdiff_t t = 0; t <= t_max; ++t) {
    for (std::size_t c = 0; c < x.cols(); ++c) {
      double acc = 0.0;
      for (std::size_t n = 1; n <= window; ++n) {
        const auto k = static_cast<std::ptrdiff_t>(n);
        const auto ahead = std::min(t + k, t_max);
        const auto behind = std::max<std::ptrdiff_t>(t - k, 0);
        acc += n * (double(x(ahead, c)) - double(x(behind, c)));
      }
      d(t, c) = static_cast<float>(acc / denom);
    }
  }
  return d;
}

}  // namespace

FrameMatrix append_deltas(const FrameMatrix& mfcc, std::size_t delta_window) {
  if (mfcc.dim() != kStaticDim)
    throw DimensionError("append_deltas expects 13-dimensional input, got " +
                         std::to_string(mfcc.dim()));
  if (delta_window == 0) throw ValidationError("delta_window must be >= 1");
  const Matrix<float> d1 = regression_deltas(mfcc.frames, delta_window);
  const Matrix<float> d2 = regression_deltas(d1, delta_window);
  FrameMatrix out;
  out.frame_rate = mfcc.frame_rate;
  out.frames = Matrix<float>(mfcc.num_frames(), kFeatureDim);
  for (std::size_t t = 0; t < mfcc.num_frames(); ++t) {
    for (std::size_t c = 0; c < kStaticDim; ++c) {
      out.frames(t, c) = mfcc.frames(t, c);
      out.frames(t, kStaticDim + c) = d1(t, c);
      out.frames(t, 2 * kStaticDim + c) = d2(t, c);
    }
  }
  return out;
}

FrameMatrix fit_length(const FrameMatrix& frames, std::size_t max_frames,
                       std::size_t min_frames) {
  if (max_frames < min_frames)
    throw ValidationError("fit_length needs max_frames >= min_frames");
  FrameMatrix out = frames;
  if (out.num_frames() > max_frames) out.frames.resize_rows(max_frames);
  else if (out.num_frames() < min_frames) out.frames.resize_rows(min_frames);
  return out;
}

FeatureStats FeatureStats::compute(
    std::span<const FrameMatrix* const> frames) {
  if (frames.empty()) throw ValidationError("no frames to compute statistics");
  const std::size_t dim = frames.front()->dim();
  std::vector<double> sum(dim, 0.0), sum_sq(dim, 0.0);
  double count = 0.0;
  for (const FrameMatrix* f : frames) {
    if (f->dim() != dim)
      throw DimensionError("inconsistent frame dimensions in statistics");
    for (std::size_t t = 0; t < f->num_frames(); ++t) {
      for (std::size_t c = 0; c < dim; ++c) {
        const double v = f->frames(t, c);
        sum[c] += v;
        sum_sq[c] += v * v;
      }
    }
    count += static_cast<double>(f->num_frames());
  }
  FeatureStats stats;
  stats.mean.resize(dim);
  stats.stddev.resize(dim);
  for (std::size_t c = 0; c < dim; ++c) {
    const double mean = sum[c] / count;
    const double var = std::max(0.0, sum_sq[c] / count - mean * mean);
    stats.mean[c] = mean;
    stats.stddev[c] = std::sqrt(var) > 1e-8 ? std::sqrt(var) : 1.0;
  }
  return stats;
}

void FeatureStats::apply(FrameMatrix& frames) const {
  if (frames.dim() != mean.size())
    throw DimensionError("feature statistics have dimension " +
                         std::to_string(mean.size()) + ", frames have " +
                         std::to_string(frames.dim()));
  for (std::size_t t = 0; t < frames.num_frames(); ++t)
    for (std::size_t c = 0; c < mean.size(); ++c)
      frames.frames(t, c) = static_cast<float>(
          (frames.frames(t, c) - mean[c]) / stddev[c]);
}

namespace {

std::uint16_t read_u16(const char* p) {
  return static_cast<std::uint16_t>(static_cast<unsigned char>(p[0]) |
                                    (static_cast<unsigned char>(p[1]) << 8));
}

std::uint32_t read_u32(const char* p) {
  return std::uint32_t(static_cast<unsigned char>(p[0])) |
         (std::uint32_t(static_cast<unsigned char>(p[1])) << 8) |
         (std::uint32_t(static_cast<unsigned char>(p[2])) << 16) |
         (std::uint32_t(static_cast<unsigned char>(p[3])) << 24);
}

}  // namespace

Waveform read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  const auto fail = [&](const std::string& why) {
    return ParseError(path.string() + ": " + why);
  };
  if (bytes.size() < 12 || bytes.compare(0, 4, "RIFF") != 0 ||
      bytes.compare(8, 4, "WAVE") != 0)
    throw fail("not a RIFF/WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::string id = bytes.substr(pos, 4);
    const std::uint32_t size = read_u32(bytes.data() + pos + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size()) throw fail("truncated chunk " + id);
    if (id == "fmt ") {
      if (size < 16) throw fail("short fmt chunk");
      format = read_u16(bytes.data() + body);
      channels = read_u16(bytes.data() + body + 2);
      rate = read_u32(bytes.data() + body + 4);
      bits = read_u16(bytes.data() + body + 14);
    } else if (id == "data") {
      if (channels == 0) throw fail("data chunk before fmt chunk");
      Waveform w;
      w.sample_rate = rate;
      const std::size_t frame_bytes = std::size_t(channels) * bits / 8;
      const std::size_t n = size / frame_bytes;
      w.samples.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        const char* p = bytes.data() + body + i * frame_bytes;
        if (format == 1 && bits == 16) {
          w.samples[i] = static_cast<std::int16_t>(read_u16(p)) / 32768.0f;
        } else if (format == 3 && bits == 32) {
          w.samples[i] = std::bit_cast<float>(read_u32(p));
        } else {
          throw fail("unsupported sample format " + std::to_string(format) +
                     "/" + std::to_string(bits) + " bits");
        }
      }
      return w;
    }
    pos = body + size + (size & 1);
  }
  throw fail("no data chunk");
}

void write_wav(const std::filesystem::path& path, const Waveform& wave) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  const auto data_bytes = static_cast<std::uint32_t>(wave.samples.size() * 2);
  const auto rate = static_cast<std::uint32_t>(wave.sample_rate);
  const auto put16 = [&](std::uint16_t v) {
    out.put(static_cast<char>(v & 0xff));
    out.put(static_cast<char>(v >> 8));
  };
  out.write("RIFF", 4);
  le::put_u32(out, 36 + data_bytes);
  out.write("WAVEfmt ", 8);
  le::put_u32(out, 16);
  put16(1);
  put16(1);
  le::put_u32(out, rate);
  le::put_u32(out, rate * 2);
  put16(2);
  put16(16);
  out.write("data", 4);
  le::put_u32(out, data_bytes);
  for (float s : wave.samples) {
    const float c = std::clamp(s, -1.0f, 32767.0f / 32768.0f);
    put16(static_cast<std::uint16_t>(
        static_cast<std::int16_t>(std::lround(c * 32768.0f))));
  }
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace xkws
