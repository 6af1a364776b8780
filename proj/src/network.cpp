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

#include "xkws/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "xkws/errors.hpp"
#include "xkws/simd/kernels.hpp"

namespace xkws {

std::array<std::size_t, 5> Architecture::lengths(std::size_t frames) const {
  std::array<std::size_t, 5> out{};
  std::size_t len = frames;
  for (std::size_t i = 0; i < 3; ++i) {
    if (len < conv[i].width) return out;
    len = len - conv[i].width + 1;
    out[2 * i] = len;
    if (i < 2) {
      len /= pool_width;
      out[2 * i + 1] = len;
    }
  }
  return out;
}

std::size_t Architecture::min_input_frames() const {
  std::size_t len = 1;
  for (std::size_t i = 3; i-- > 0;) {
    len += conv[i].width - 1;
    if (i > 0) len *= pool_width;
  }
  return len;
}

template <typename Real>
std::size_t NetworkParams<Real>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weight.size() + l.bias.size();
  return n;
}

template <typename Real>
bool NetworkParams<Real>::same_shape(const NetworkParams& other) const {
  if (!(arch == other.arch) || output_dim != other.output_dim) return false;
  for (std::size_t i = 0; i < kNumLayers; ++i) {
    const auto &a = layers[i], &b = other.layers[i];
    if (a.kind != b.kind || a.outputs != b.outputs ||
        a.in_channels != b.in_channels || a.width != b.width ||
        a.weight.size() != b.weight.size() || a.bias.size() != b.bias.size())
      return false;
  }
  return true;
}

namespace {

template <typename Real>
Layer<Real> make_layer(LayerKind kind, std::size_t outputs,
                       std::size_t in_channels, std::size_t width) {
  Layer<Real> l;
  l.kind = kind;
  l.outputs = outputs;
  l.in_channels = in_channels;
  l.width = width;
  l.weight.assign(outputs * in_channels * width, Real(0));
  l.bias.assign(outputs, Real(0));
  return l;
}

template <typename Real>
NetworkParams<Real> shaped_params(const Architecture& arch,
                                  std::size_t output_dim) {
  NetworkParams<Real> p;
  p.arch = arch;
  p.output_dim = output_dim;
  std::size_t channels = arch.input_dim;
  for (std::size_t i = 0; i < 3; ++i) {
    p.layers[i] = make_layer<Real>(LayerKind::kConv, arch.conv[i].filters,
                                   channels, arch.conv[i].width);
    channels = arch.conv[i].filters;
  }
  p.layers[3] = make_layer<Real>(LayerKind::kDense, arch.hidden_units,
                                 channels, 1);
  p.layers[4] =
      make_layer<Real>(LayerKind::kDense, output_dim, arch.hidden_units, 1);
  return p;
}

}  // namespace

template <typename Real>
void NetworkParams<Real>::validate() const {
  if (output_dim == 0) throw ValidationError("network output size must be >= 1");
  if (!same_shape(shaped_params<Real>(arch, output_dim)))
    throw DimensionError("network parameters do not match the architecture");
  for (std::size_t i = 0; i < kNumLayers; ++i) {
    for (Real v : layers[i].weight)
      if (!std::isfinite(v))
        throw ValidationError("non-finite weight in layer " +
                              std::string(kLayerNames[i]));
    for (Real v : layers[i].bias)
      if (!std::isfinite(v))
        throw ValidationError("non-finite bias in layer " +
                              std::string(kLayerNames[i]));
  }
}

template <typename Real>
NetworkParams<Real> init_params(const Architecture& arch,
                                std::size_t output_dim, std::uint64_t seed) {
  if (output_dim == 0) throw ValidationError("network output size must be >= 1");
  NetworkParams<Real> p = shaped_params<Real>(arch, output_dim);
  std::mt19937_64 rng(seed);
  for (auto& layer : p.layers) {
    std::normal_distribution<double> dist(
        0.0, std::sqrt(2.0 / static_cast<double>(layer.fan_in())));
    for (Real& w : layer.weight) w = static_cast<Real>(dist(rng));
  }
  return p;
}

template <typename Real>
Gradients<Real> zero_gradients(const NetworkParams<Real>& params) {
  return shaped_params<Real>(params.arch, params.output_dim);
}

template <typename To, typename From>
NetworkParams<To> convert_params(const NetworkParams<From>& params) {
  NetworkParams<To> out = shaped_params<To>(params.arch, params.output_dim);
  for (std::size_t i = 0; i < kNumLayers; ++i) {
    std::transform(params.layers[i].weight.begin(),
                   params.layers[i].weight.end(), out.layers[i].weight.begin(),
                   [](From v) { return static_cast<To>(v); });
    std::transform(params.layers[i].bias.begin(), params.layers[i].bias.end(),
                   out.layers[i].bias.begin(),
                   [](From v) { return static_cast<To>(v); });
  }
  return out;
}

namespace {

template <typename Real>
void relu(std::span<Real> x) {
  for (Real& v : x) v = v > Real(0) ? v : Real(0);
}

template <typename Real>
Matrix<Real> conv_forward(const Layer<Real>& layer, const Matrix<Real>& in) {
  const std::size_t len = in.rows() - layer.width + 1;
  Matrix<Real> out(len, layer.outputs);
  simd::GemmNT<Real> g;
  g.m = len;
  g.n = layer.outputs;
  g.k = layer.fan_in();
  g.a = in.data();
  g.lda = in.cols();
  g.b = layer.weight.data();
  g.ldb = g.k;
  g.bias = layer.bias.data();
  g.c = out.data();
  g.ldc = layer.outputs;
  simd::active_kernels<Real>().gemm_nt(g);
  relu(out.values());
  return out;
}

template <typename Real>
void dense_forward(const Layer<Real>& layer, std::span<const Real> in,
                   std::vector<Real>& out) {
  out.assign(layer.outputs, Real(0));
  simd::GemmNT<Real> g;
  g.m = 1;
  g.n = layer.outputs;
  g.k = layer.fan_in();
  g.a = in.data();
  g.lda = g.k;
  g.b = layer.weight.data();
  g.ldb = g.k;
  g.bias = layer.bias.data();
  g.c = out.data();
  g.ldc = layer.outputs;
  simd::active_kernels<Real>().gemm_nt(g);
}

template <typename Real>
Matrix<Real> max_pool(const Matrix<Real>& in, std::size_t width,
                      std::vector<std::uint32_t>& argmax) {
  const std::size_t len = in.rows() / width;
  Matrix<Real> out(len, in.cols());
  argmax.assign(len * in.cols(), 0);
  for (std::size_t r = 0; r < len; ++r) {
    for (std::size_t c = 0; c < in.cols(); ++c) {
      std::size_t best = r * width;
      for (std::size_t k = 1; k < width; ++k)
        if (in(r * width + k, c) > in(best, c)) best = r * width + k;
      out(r, c) = in(best, c);
      argmax[r * in.cols() + c] = static_cast<std::uint32_t>(best);
    }
  }
  return out;
}

template <typename Real>
Real stable_sigmoid(Real logit) {
  const double x = static_cast<double>(logit);
  const double s = x >= 0 ? 1.0 / (1.0 + std::exp(-x))
                          : std::exp(x) / (1.0 + std::exp(x));
  constexpr Real lo = std::numeric_limits<Real>::min();
  const Real hi = std::nextafter(Real(1), Real(0));
  return std::clamp(static_cast<Real>(s), lo, hi);
}

}  // namespace

template <typename Real>
ForwardTrace<Real> forward(const NetworkParams<Real>& params,
                           const Matrix<Real>& frames) {
  const Architecture& arch = params.arch;
  if (frames.cols() != arch.input_dim)
    throw DimensionError("network expects " + std::to_string(arch.input_dim) +
                         "-dimensional frames, got " +
                         std::to_string(frames.cols()));
  if (frames.rows() < arch.min_input_frames())
    throw LengthError("input has " + std::to_string(frames.rows()) +
                      " frames; the network needs at least " +
                      std::to_string(arch.min_input_frames()) +
                      " (pad with fit_length)");
  for (Real v : frames.values())
    if (!std::isfinite(v))
      throw ValidationError("network input contains a non-finite value");

  ForwardTrace<Real> t;
  t.revision = params.revision;
  t.output_dim = params.output_dim;
  t.input = frames;
  t.conv_out[0] = conv_forward(params.layers[0], t.input);
  t.pool_out[0] = max_pool(t.conv_out[0], arch.pool_width, t.pool_argmax[0]);
  t.conv_out[1] = conv_forward(params.layers[1], t.pool_out[0]);
  t.pool_out[1] = max_pool(t.conv_out[1], arch.pool_width, t.pool_argmax[1]);
  t.conv_out[2] = conv_forward(params.layers[2], t.pool_out[1]);

  const Matrix<Real>& last = t.conv_out[2];
  t.global_out.assign(last.cols(), Real(0));
  t.global_argmax.assign(last.cols(), 0);
  for (std::size_t c = 0; c < last.cols(); ++c) {
    std::size_t best = 0;
    for (std::size_t r = 1; r < last.rows(); ++r)
      if (last(r, c) > last(best, c)) best = r;
    t.global_out[c] = last(best, c);
    t.global_argmax[c] = static_cast<std::uint32_t>(best);
  }

  dense_forward(params.layers[3], std::span<const Real>(t.global_out), t.hidden);
  relu(std::span<Real>(t.hidden));
  dense_forward(params.layers[4], std::span<const Real>(t.hidden), t.logits);
  t.scores.resize(t.logits.size());
  std::transform(t.logits.begin(), t.logits.end(), t.scores.begin(),
                 stable_sigmoid<Real>);
  return t;
}

template <typename Real>
double summed_cross_entropy(std::span<const Real> scores,
                            std::span<const Real> target) {
  if (scores.size() != target.size())
    throw DimensionError("loss: " + std::to_string(scores.size()) +
                         " scores vs " + std::to_string(target.size()) +
                         " targets");
  constexpr double eps = 1e-12;
  double loss = 0.0;
  for (std::size_t w = 0; w < scores.size(); ++w) {
    const double f = std::clamp(static_cast<double>(scores[w]), eps, 1.0 - eps);
    const double y = static_cast<double>(target[w]);
    loss -= y * std::log(f) + (1.0 - y) * std::log1p(-f);
  }
  return loss;
}

namespace {

// d_out must already be masked by the ReLU derivative.
template <typename Real>
void conv_backward(const Layer<Real>& layer, const Matrix<Real>& in,
                   const Matrix<Real>& d_out, Layer<Real>& grad,
                   Matrix<Real>* d_in) {
  const auto& k = simd::active_kernels<Real>();
  const std::size_t fan_in = layer.fan_in();
  const std::size_t channels = in.cols();
  for (std::size_t t = 0; t < d_out.rows(); ++t) {
    const Real* window = in.data() + t * channels;
    for (std::size_t f = 0; f < layer.outputs; ++f) {
      const Real g = d_out(t, f);
      if (g == Real(0)) continue;
      grad.bias[f] += g;
      k.axpy(g, window, grad.weight.data() + f * fan_in, fan_in);
      if (d_in)
        k.axpy(g, layer.weight.data() + f * fan_in, d_in->data() + t * channels,
               fan_in);
    }
  }
}

template <typename Real>
void dense_backward(const Layer<Real>& layer, std::span<const Real> in,
                    std::span<const Real> d_out, Layer<Real>& grad,
                    std::vector<Real>* d_in) {
  const auto& k = simd::active_kernels<Real>();
  const std::size_t fan_in = layer.fan_in();
  if (d_in) d_in->assign(fan_in, Real(0));
  for (std::size_t j = 0; j < layer.outputs; ++j) {
    const Real g = d_out[j];
    if (g == Real(0)) continue;
    grad.bias[j] += g;
    k.axpy(g, in.data(), grad.weight.data() + j * fan_in, fan_in);
    if (d_in) k.axpy(g, layer.weight.data() + j * fan_in, d_in->data(), fan_in);
  }
}

template <typename Real>
Matrix<Real> unpool(const Matrix<Real>& d_pooled,
                    const std::vector<std::uint32_t>& argmax,
                    const Matrix<Real>& activations) {
  Matrix<Real> d(activations.rows(), activations.cols());
  for (std::size_t r = 0; r < d_pooled.rows(); ++r)
    for (std::size_t c = 0; c < d_pooled.cols(); ++c)
      d(argmax[r * d_pooled.cols() + c], c) = d_pooled(r, c);
  return d;
}

template <typename Real>
void mask_relu(Matrix<Real>& d, const Matrix<Real>& activations) {
  auto dv = d.values();
  auto av = activations.values();
  for (std::size_t i = 0; i < dv.size(); ++i)
    if (!(av[i] > Real(0))) dv[i] = Real(0);
}

}  // namespace

template <typename Real>
void backward(const NetworkParams<Real>& params, const ForwardTrace<Real>& trace,
              std::span<const Real> target, Real loss_scale,
              Gradients<Real>& grads) {
  if (trace.revision != params.revision ||
      trace.output_dim != params.output_dim ||
      trace.scores.size() != params.output_dim)
    throw Error("forward trace does not belong to these parameters "
                "(stale or mismatched)");
  if (target.size() != params.output_dim)
    throw DimensionError("target has " + std::to_string(target.size()) +
                         " entries, network output has " +
                         std::to_string(params.output_dim));
  if (!grads.same_shape(params))
    throw DimensionError("gradient buffer does not match the parameters");

  std::vector<Real> d_logits(params.output_dim);
  for (std::size_t w = 0; w < d_logits.size(); ++w)
    d_logits[w] = loss_scale * (trace.scores[w] - target[w]);

  std::vector<Real> d_hidden;
  dense_backward(params.layers[4], std::span<const Real>(trace.hidden),
                 std::span<const Real>(d_logits), grads.layers[4], &d_hidden);
  for (std::size_t j = 0; j < d_hidden.size(); ++j)
    if (!(trace.hidden[j] > Real(0))) d_hidden[j] = Real(0);

  std::vector<Real> d_global;
  dense_backward(params.layers[3], std::span<const Real>(trace.global_out),
                 std::span<const Real>(d_hidden), grads.layers[3], &d_global);

  const Matrix<Real>& c3 = trace.conv_out[2];
  Matrix<Real> d_c3(c3.rows(), c3.cols());
  for (std::size_t c = 0; c < c3.cols(); ++c)
    d_c3(trace.global_argmax[c], c) = d_global[c];
  mask_relu(d_c3, c3);

  Matrix<Real> d_p2(trace.pool_out[1].rows(), trace.pool_out[1].cols());
  conv_backward(params.layers[2], trace.pool_out[1], d_c3, grads.layers[2],
                &d_p2);
  Matrix<Real> d_c2 = unpool(d_p2, trace.pool_argmax[1], trace.conv_out[1]);
  mask_relu(d_c2, trace.conv_out[1]);

  Matrix<Real> d_p1(trace.pool_out[0].rows(), trace.pool_out[0].cols());
  conv_backward(params.layers[1], trace.pool_out[0], d_c2, grads.layers[1],
                &d_p1);
  Matrix<Real> d_c1 = unpool(d_p1, trace.pool_argmax[0], trace.conv_out[0]);
  mask_relu(d_c1, trace.conv_out[0]);

  conv_backward(params.layers[0], trace.input, d_c1, grads.layers[0],
                static_cast<Matrix<Real>*>(nullptr));
}

#define XKWS_INSTANTIATE(Real)                                                \
  template struct NetworkParams<Real>;                                        \
  template NetworkParams<Real> init_params<Real>(const Architecture&,         \
                                                 std::size_t, std::uint64_t); \
  template Gradients<Real> zero_gradients<Real>(const NetworkParams<Real>&);  \
  template ForwardTrace<Real> forward<Real>(const NetworkParams<Real>&,       \
                                            const Matrix<Real>&);             \
  template double summed_cross_entropy<Real>(std::span<const Real>,           \
                                             std::span<const Real>);          \
  template void backward<Real>(const NetworkParams<Real>&,                    \
                               const ForwardTrace<Real>&,                     \
                               std::span<const Real>, Real, Gradients<Real>&);

XKWS_INSTANTIATE(float)
XKWS_INSTANTIATE(double)
#undef XKWS_INSTANTIATE

template NetworkParams<float> convert_params<float, double>(
    const NetworkParams<double>&);
template NetworkParams<double> convert_params<double, float>(
    const NetworkParams<float>&);
template NetworkParams<float> convert_params<float, float>(
    const NetworkParams<float>&);
template NetworkParams<double> convert_params<double, double>(
    const NetworkParams<double>&);

}  // namespace xkws
