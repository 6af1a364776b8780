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

#include <cmath>

#include "tables.hpp"

namespace xkws::simd::detail {
namespace {

template <typename Real>
Real dot(const Real* a, const Real* b, std::size_t n) {
  Real s = 0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

template <typename Real>
void axpy(Real alpha, const Real* x, Real* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

template <typename Real>
void gemm_nt(const GemmNT<Real>& g) {
  for (std::size_t i = 0; i < g.m; ++i) {
    const Real* a_row = g.a + i * g.lda;
    Real* c_row = g.c + i * g.ldc;
    for (std::size_t j = 0; j < g.n; ++j) {
      Real s = dot(a_row, g.b + j * g.ldb, g.k);
      c_row[j] = g.bias ? g.bias[j] + s : s;
    }
  }
}

template <typename Real>
void adam(const AdamUpdate<Real>& u) {
  const Real one_minus_b1 = Real(1) - u.beta1;
  const Real one_minus_b2 = Real(1) - u.beta2;
  for (std::size_t i = 0; i < u.n; ++i) {
    const Real g = u.grad[i];
    u.m[i] = u.beta1 * u.m[i] + one_minus_b1 * g;
    u.v[i] = u.beta2 * u.v[i] + one_minus_b2 * (g * g);
    const Real m_hat = u.m[i] / u.bias_correction1;
    const Real v_hat = u.v[i] / u.bias_correction2;
    u.param[i] -= u.learning_rate * m_hat / (std::sqrt(v_hat) + u.epsilon);
  }
}

}  // namespace

const KernelTable<float> kScalarF32{Isa::kScalar, &dot<float>, &axpy<float>,
                                    &gemm_nt<float>, &adam<float>};
const KernelTable<double> kScalarF64{Isa::kScalar, &dot<double>,
                                     &axpy<double>, &gemm_nt<double>,
                                     &adam<double>};

}  // namespace xkws::simd::detail
