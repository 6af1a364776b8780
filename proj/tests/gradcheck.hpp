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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include "xkws/network.hpp"

namespace xkws::testing {

// Same kernel widths and pooling as the full network, few channels.
inline Architecture miniature_architecture() {
  Architecture a;
  a.conv = {{{3, 9}, {4, 10}, {5, 11}}};
  a.hidden_units = 6;
  return a;
}

struct GradCheckResult {
  double max_rel_error = 0;
  std::size_t checked = 0;
  std::string worst;  // layer and index of the worst parameter
};

// Relative error |a - n| / max(|a|, |n|, floor). The floor keeps entries
// whose true gradient is zero from dividing rounding noise by nothing.
inline double relative_error(double analytic, double numeric, double floor) {
  return std::abs(analytic - numeric) /
         std::max({std::abs(analytic), std::abs(numeric), floor});
}

// Central differences over every weight and bias of a miniature network in
// double precision.
inline GradCheckResult gradient_check(std::uint64_t seed, std::size_t output_dim = 5,
                                      std::size_t frames = 140,
                                      double step = 1e-5, double floor = 1e-6) {
  const Architecture arch = miniature_architecture();
  NetworkParams<double> p = init_params<double>(arch, output_dim, seed);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (auto& layer : p.layers)
    for (auto& b : layer.bias) b = 0.1 * gauss(rng);
  Matrix<double> x(frames, arch.input_dim);
  for (double& v : x.values()) v = gauss(rng);
  std::vector<double> y(output_dim);
  for (double& v : y) v = unit(rng);

  const auto loss = [&]() {
    const auto t = forward(p, x);
    return summed_cross_entropy<double>(t.scores, y);
  };
  Gradients<double> g = zero_gradients(p);
  backward<double>(p, forward(p, x), y, 1.0, g);

  GradCheckResult out;
  for (std::size_t l = 0; l < kNumLayers; ++l) {
    for (int part = 0; part < 2; ++part) {
      auto& values = part == 0 ? p.layers[l].weight : p.layers[l].bias;
      const auto& analytic = part == 0 ? g.layers[l].weight : g.layers[l].bias;
      for (std::size_t i = 0; i < values.size(); ++i) {
        const double saved = values[i];
        values[i] = saved + step;
        ++p.revision;
        const double plus = loss();
        values[i] = saved - step;
        const double minus = loss();
        values[i] = saved;
        const double numeric = (plus - minus) / (2 * step);
        const double err = relative_error(analytic[i], numeric, floor);
        ++out.checked;
        if (err > out.max_rel_error) {
          out.max_rel_error = err;
          out.worst = std::string(kLayerNames[l]) +
                      (part == 0 ? ".weight[" : ".bias[") +
                      std::to_string(i) + "]";
        }
      }
    }
  }
  return out;
}

}  // namespace xkws::testing
