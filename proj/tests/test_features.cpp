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

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "test_util.hpp"
#include "xkws/binary_io.hpp"
#include "xkws/errors.hpp"
#include "xkws/features.hpp"

using namespace xkws;

namespace {

std::vector<float> noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(-0.5f, 0.5f);
  std::vector<float> out(n);
  for (auto& s : out) s = u(rng);
  return out;
}

// Independent O(N^2) path: pre-emphasis, Hamming window, naive DFT
// magnitude, triangular mel filters, log with floor.
Matrix<double> naive_log_mel(const std::vector<float>& x, const FeatureConfig& c) {
  const std::size_t win = c.window_samples(), hop = c.hop_samples();
  const std::size_t nfft = c.fft_size(), bins = nfft / 2 + 1;
  const Matrix<double> fb = mel_filterbank(c);
  const std::size_t frames = (x.size() - win) / hop + 1;
  Matrix<double> out(frames, c.num_mel_filters);
  for (std::size_t t = 0; t < frames; ++t) {
    std::vector<double> frame(nfft, 0.0);
    for (std::size_t n = 0; n < win; ++n) {
      const std::size_t i = t * hop + n;
      const double e = i == 0 ? x[0] : x[i] - c.pre_emphasis * x[i - 1];
      frame[n] = e * (0.54 - 0.46 * std::cos(2 * std::numbers::pi * n / (win - 1)));
    }
    for (std::size_t m = 0; m < c.num_mel_filters; ++m) {
      double energy = 0;
      for (std::size_t k = 0; k < bins; ++k) {
        double re = 0, im = 0;
        for (std::size_t n = 0; n < nfft; ++n) {
          const double a = -2 * std::numbers::pi * double(k * n % nfft) / nfft;
          re += frame[n] * std::cos(a);
          im += frame[n] * std::sin(a);
        }
        energy += fb(m, k) * std::sqrt(re * re + im * im);
      }
      out(t, m) = std::log(std::max(energy, c.log_floor));
    }
  }
  return out;
}

}  // namespace

TEST_CASE("frame count follows window and hop") {
  FeatureConfig c;
  CHECK(c.window_samples() == 400);
  CHECK(c.hop_samples() == 160);
  CHECK(c.fft_size() == 512);
  CHECK(mfcc_frame_count(16000, c) == 98);
  CHECK(mfcc_frame_count(400, c) == 1);
  CHECK(mfcc_frame_count(399, c) == 0);
}

TEST_CASE("mel scale") {
  CHECK(hz_to_mel(0) == 0);
  CHECK(hz_to_mel(700) == doctest::Approx(2595 * std::log10(2.0)));
  for (double hz : {50.0, 440.0, 1000.0, 7999.0})
    CHECK(mel_to_hz(hz_to_mel(hz)) == doctest::Approx(hz).epsilon(1e-12));
}

TEST_CASE("mel filterbank is a set of unit-peak triangles") {
  FeatureConfig c;
  const auto fb = mel_filterbank(c);
  REQUIRE(fb.rows() == 23);
  REQUIRE(fb.cols() == 257);
  for (std::size_t m = 0; m < fb.rows(); ++m) {
    double peak = 0;
    std::size_t nonzero = 0;
    for (double w : fb.row(m)) {
      CHECK(w >= 0);
      CHECK(w <= 1.0 + 1e-12);
      peak = std::max(peak, w);
      nonzero += w > 0;
    }
    CHECK(nonzero >= 1);
    CHECK(peak > 0.3);
  }
}

TEST_CASE("log mel energies match a naive DFT") {
  FeatureConfig c;
  const auto x = noise(400 + 160 * 4, 3);
  const auto fast = log_mel_energies(x, c);
  const auto slow = naive_log_mel(x, c);
  REQUIRE(fast.rows() == 5);
  REQUIRE(slow.rows() == 5);
  for (std::size_t i = 0; i < fast.size(); ++i)
    CHECK(fast.values()[i] == doctest::Approx(slow.values()[i]).epsilon(1e-9));
}

TEST_CASE("a pure tone peaks in the filter covering its frequency") {
  FeatureConfig c;
  std::vector<float> x(1600);
  for (std::size_t i = 0; i < x.size(); ++i)
    x[i] = static_cast<float>(0.5 * std::sin(2 * std::numbers::pi * 1000.0 * i / 16000.0));
  c.pre_emphasis = 0;
  const auto e = log_mel_energies(x, c);
  const auto fb = mel_filterbank(c);
  const std::size_t bin = 1000 * 512 / 16000;
  std::size_t best = 0;
  for (std::size_t m = 1; m < e.cols(); ++m)
    if (e(2, m) > e(2, best)) best = m;
  CHECK(fb(best, bin) > 0);
}

TEST_CASE("silence hits the log floor") {
  FeatureConfig c;
  std::vector<float> x(800, 0.0f);
  const auto e = log_mel_energies(x, c);
  for (double v : e.values()) CHECK(v == doctest::Approx(std::log(1e-10)));
}

TEST_CASE("mfcc is an orthonormal DCT of log mel energies") {
  FeatureConfig c;
  const auto x = noise(4000, 9);
  const auto e = log_mel_energies(x, c);
  const auto mfcc = extract_mfcc(x, c);
  REQUIRE(mfcc.num_frames() == e.rows());
  REQUIRE(mfcc.dim() == 13);
  CHECK(mfcc.frame_rate == doctest::Approx(100));
  for (std::size_t t = 0; t < e.rows(); ++t) {
    double sum = 0;
    for (double v : e.row(t)) sum += v;
    CHECK(mfcc.frames(t, 0) == doctest::Approx(sum / std::sqrt(23.0)).epsilon(1e-5));
  }
}

TEST_CASE("short or non-finite waveforms are rejected") {
  FeatureConfig c;
  CHECK_THROWS_AS(log_mel_energies(std::vector<float>(100), c), ValidationError);
  auto x = noise(800, 1);
  x[5] = std::nanf("");
  CHECK_THROWS_AS(extract_mfcc(x, c), ValidationError);
  c.hop_length = 0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
}

TEST_CASE("regression deltas of a ramp") {
  FrameMatrix f;
  f.frames = Matrix<float>(10, 13);
  for (std::size_t t = 0; t < 10; ++t)
    for (std::size_t c = 0; c < 13; ++c) f.frames(t, c) = static_cast<float>(t);
  const auto d = append_deltas(f, 2);
  REQUIRE(d.dim() == 39);
  for (std::size_t t = 2; t < 8; ++t) {
    CHECK(d.frames(t, 0) == doctest::Approx(t));
    CHECK(d.frames(t, 13) == doctest::Approx(1.0));
  }
  for (std::size_t t = 4; t < 6; ++t) CHECK(d.frames(t, 26) == doctest::Approx(0.0));
  // Edge replication: (1 * (1 - 0) + 2 * (2 - 0)) / 10.
  CHECK(d.frames(0, 13) == doctest::Approx(0.5));
  CHECK_THROWS_AS(append_deltas(d, 2), DimensionError);
}

TEST_CASE("fit_length truncates and zero-pads") {
  FrameMatrix f;
  f.frames = Matrix<float>(5, 39, 1.0f);
  CHECK(fit_length(f, 3, 0).num_frames() == 3);
  const auto padded = fit_length(f, 10, 8);
  REQUIRE(padded.num_frames() == 8);
  CHECK(padded.frames(4, 0) == 1.0f);
  CHECK(padded.frames(7, 38) == 0.0f);
  CHECK(fit_length(f, 10, 2).num_frames() == 5);
  CHECK_THROWS_AS(fit_length(f, 2, 3), ValidationError);
}

TEST_CASE("feature statistics standardise each dimension") {
  FrameMatrix a, b;
  a.frames = Matrix<float>(3, 13);
  b.frames = Matrix<float>(2, 13);
  for (std::size_t t = 0; t < 3; ++t) a.frames(t, 0) = float(t);  // 0 1 2
  b.frames(0, 0) = 3;
  b.frames(1, 0) = 4;
  const FrameMatrix* all[] = {&a, &b};
  const auto stats = FeatureStats::compute(all);
  CHECK(stats.mean[0] == doctest::Approx(2.0));
  CHECK(stats.stddev[0] == doctest::Approx(std::sqrt(2.0)));
  CHECK(stats.stddev[1] == doctest::Approx(1.0));  // constant dimension
  stats.apply(a);
  CHECK(a.frames(0, 0) == doctest::Approx(-2 / std::sqrt(2.0)));
  FrameMatrix wrong;
  wrong.frames = Matrix<float>(2, 39);
  CHECK_THROWS_AS(stats.apply(wrong), DimensionError);
}

TEST_CASE("frame matrix validation") {
  FrameMatrix f;
  CHECK_THROWS_AS(f.validate(), ValidationError);
  f.frames = Matrix<float>(4, 12);
  CHECK_THROWS_AS(f.validate(), ValidationError);
  f.frames = Matrix<float>(4, 39);
  CHECK_NOTHROW(f.validate());
  f.frames(1, 1) = INFINITY;
  CHECK_THROWS_AS(f.validate(), ValidationError);
}

TEST_CASE("KWSF frame files round-trip bit-exactly") {
  testing::TempDir dir;
  Matrix<float> m(3, 39);
  for (std::size_t i = 0; i < m.size(); ++i) m.values()[i] = float(i) * 0.1f - 2.f;
  write_frame_file(dir / "a.kwsf", m);
  CHECK(read_frame_file(dir / "a.kwsf") == m);
  CHECK(std::filesystem::file_size(dir / "a.kwsf") == 4 + 1 + 8 + m.size() * 4);

  std::stringstream ss;
  write_frame_stream(ss, m);
  std::string bytes = ss.str();
  CHECK(bytes.substr(0, 4) == "KWSF");
  CHECK(static_cast<unsigned char>(bytes[5]) == 3);  // T, little-endian

  std::istringstream bad_magic("KWSX" + bytes.substr(4));
  CHECK_THROWS_AS(read_frame_stream(bad_magic, "x"), ParseError);
  std::istringstream truncated(bytes.substr(0, bytes.size() - 3));
  CHECK_THROWS_AS(read_frame_stream(truncated, "x"), ParseError);
  std::string huge = bytes.substr(0, 13);
  huge[5] = huge[6] = huge[7] = huge[8] = '\xff';
  std::istringstream oversized(huge);
  CHECK_THROWS_AS(read_frame_stream(oversized, "x"), ParseError);
  CHECK_THROWS_AS(read_frame_file(dir / "missing.kwsf"), Error);
}

TEST_CASE("wav files round-trip through 16-bit PCM") {
  testing::TempDir dir;
  Waveform w{noise(1000, 5), 16000};
  write_wav(dir / "a.wav", w);
  const auto r = read_wav(dir / "a.wav");
  CHECK(r.sample_rate == 16000);
  REQUIRE(r.samples.size() == w.samples.size());
  for (std::size_t i = 0; i < w.samples.size(); ++i)
    CHECK(std::abs(r.samples[i] - w.samples[i]) <= 1.0f / 32768);
  std::ofstream(dir / "junk.wav") << "not a wave";
  CHECK_THROWS_AS(read_wav(dir / "junk.wav"), ParseError);
}
