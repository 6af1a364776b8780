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

// Kernel bodies shared by every vector ISA. Each ISA translation unit
// supplies a traits type V exposing Scalar, Reg, kWidth and the register
// operations used below, then instantiates make_table<V>().

#include <cmath>
#include <cstddef>

#include "xkws/simd/kernels.hpp"

namespace xkws::simd::detail {

template <class V>
typename V::Scalar vec_dot(const typename V::Scalar* a,
                           const typename V::Scalar* b, std::size_t n) {
  using T = typename V::Scalar;
  typename V::Reg acc0 = V::zero(), acc1 = V::zero();
  std::size_t i = 0;
  for (; i + 2 * V::kWidth <= n; i += 2 * V::kWidth) {
    acc0 = V::fmadd(V::load(a + i), V::load(b + i), acc0);
    acc1 = V::fmadd(V::load(a + i + V::kWidth), V::load(b + i + V::kWidth),
                    acc1);
  }
  for (; i + V::kWidth <= n; i += V::kWidth)
    acc0 = V::fmadd(V::load(a + i), V::load(b + i), acc0);
  T s = V::hsum(V::add(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

template <class V>
void vec_axpy(typename V::Scalar alpha, const typename V::Scalar* x,
              typename V::Scalar* y, std::size_t n) {
  const typename V::Reg va = V::set1(alpha);
  std::size_t i = 0;
  for (; i + V::kWidth <= n; i += V::kWidth)
    V::store(y + i, V::fmadd(va, V::load(x + i), V::load(y + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

// Register-blocked MR x NR tile of dot products.
template <class V, int MR, int NR>
void gemm_tile(const GemmNT<typename V::Scalar>& g, std::size_t i0,
               std::size_t j0) {
  using T = typename V::Scalar;
  typename V::Reg acc[MR][NR];
  for (int r = 0; r < MR; ++r)
    for (int c = 0; c < NR; ++c) acc[r][c] = V::zero();

  const T* a = g.a + i0 * g.lda;
  const T* b = g.b + j0 * g.ldb;
  std::size_t p = 0;
  for (; p + V::kWidth <= g.k; p += V::kWidth) {
    typename V::Reg bv[NR];
    for (int c = 0; c < NR; ++c) bv[c] = V::load(b + c * g.ldb + p);
    for (int r = 0; r < MR; ++r) {
      const typename V::Reg av = V::load(a + r * g.lda + p);
      for (int c = 0; c < NR; ++c) acc[r][c] = V::fmadd(av, bv[c], acc[r][c]);
    }
  }
  for (int r = 0; r < MR; ++r) {
    for (int c = 0; c < NR; ++c) {
      T s = V::hsum(acc[r][c]);
      for (std::size_t q = p; q < g.k; ++q)
        s += a[r * g.lda + q] * b[c * g.ldb + q];
      T* out = g.c + (i0 + r) * g.ldc + (j0 + c);
      *out = g.bias ? g.bias[j0 + c] + s : s;
    }
  }
}

template <class V, int NR>
void gemm_row_tail(const GemmNT<typename V::Scalar>& g, std::size_t i0,
                   std::size_t rows, std::size_t j0) {
  switch (rows) {
    case 1: gemm_tile<V, 1, NR>(g, i0, j0); break;
    case 2: gemm_tile<V, 2, NR>(g, i0, j0); break;
    case 3: gemm_tile<V, 3, NR>(g, i0, j0); break;
    default: break;
  }
}

// B is streamed once in the outer loop; A (the short activation window) is
// revisited per column tile and stays cache resident.
template <class V>
void vec_gemm_nt(const GemmNT<typename V::Scalar>& g) {
  constexpr int kMR = 4;
  constexpr int kNR = 2;
  std::size_t j = 0;
  for (; j + kNR <= g.n; j += kNR) {
    std::size_t i = 0;
    for (; i + kMR <= g.m; i += kMR) gemm_tile<V, kMR, kNR>(g, i, j);
    gemm_row_tail<V, kNR>(g, i, g.m - i, j);
  }
  for (; j < g.n; ++j) {
    std::size_t i = 0;
    for (; i + kMR <= g.m; i += kMR) gemm_tile<V, kMR, 1>(g, i, j);
    gemm_row_tail<V, 1>(g, i, g.m - i, j);
  }
}

template <class V>
void vec_adam(const AdamUpdate<typename V::Scalar>& u) {
  using T = typename V::Scalar;
  const T one_minus_b1 = T(1) - u.beta1;
  const T one_minus_b2 = T(1) - u.beta2;
  const auto b1 = V::set1(u.beta1), b2 = V::set1(u.beta2);
  const auto c1 = V::set1(one_minus_b1), c2 = V::set1(one_minus_b2);
  const auto bc1 = V::set1(u.bias_correction1);
  const auto bc2 = V::set1(u.bias_correction2);
  const auto lr = V::set1(u.learning_rate), eps = V::set1(u.epsilon);
  std::size_t i = 0;
  for (; i + V::kWidth <= u.n; i += V::kWidth) {
    const auto g = V::load(u.grad + i);
    const auto m = V::add(V::mul(b1, V::load(u.m + i)), V::mul(c1, g));
    const auto v =
        V::add(V::mul(b2, V::load(u.v + i)), V::mul(c2, V::mul(g, g)));
    V::store(u.m + i, m);
    V::store(u.v + i, v);
    const auto m_hat = V::div(m, bc1);
    const auto v_hat = V::div(v, bc2);
    const auto step =
        V::div(V::mul(lr, m_hat), V::add(V::sqrt(v_hat), eps));
    V::store(u.param + i, V::sub(V::load(u.param + i), step));
  }
  for (; i < u.n; ++i) {
    const T g = u.grad[i];
    u.m[i] = u.beta1 * u.m[i] + one_minus_b1 * g;
    u.v[i] = u.beta2 * u.v[i] + one_minus_b2 * (g * g);
    const T m_hat = u.m[i] / u.bias_correction1;
    const T v_hat = u.v[i] / u.bias_correction2;
    u.param[i] -= u.learning_rate * m_hat / (std::sqrt(v_hat) + u.epsilon);
  }
}

template <class V>
constexpr KernelTable<typename V::Scalar> make_table(Isa isa) {
  return {isa, &vec_dot<V>, &vec_axpy<V>, &vec_gemm_nt<V>, &vec_adam<V>};
}

}  // namespace xkws::simd::detail
