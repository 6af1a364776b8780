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
#include <string_view>

namespace xkws::simd {

enum class Isa { kScalar, kAvx2, kNeon };

std::string_view isa_name(Isa isa);
Isa parse_isa(std::string_view name);

// Arguments for C = A * B^T (+ bias), where row i of A starts at a + i * lda
// and row j of B starts at b + j * ldb. Rows of A may overlap (lda < k), which
// is how valid 1-D convolution over a row-major T x C signal maps onto GEMM.
template <typename Real>
struct GemmNT {
  std::size_t m = 0;
  std::size_t n = 0;
  std::size_t k = 0;
  const Real* a = nullptr;
  std::size_t lda = 0;
  const Real* b = nullptr;
  std::size_t ldb = 0;
  const Real* bias = nullptr;  // length n, may be null
  Real* c = nullptr;
  std::size_t ldc = 0;
};

// Bias-corrected Adam update over n contiguous parameters.
template <typename Real>
struct AdamUpdate {
  std::size_t n = 0;
  Real* param = nullptr;
  const Real* grad = nullptr;
  Real* m = nullptr;
  Real* v = nullptr;
  Real learning_rate = 0;
  Real beta1 = 0;
  Real beta2 = 0;
  Real epsilon = 0;
  Real bias_correction1 = 1;  // 1 - beta1^t
  Real bias_correction2 = 1;  // 1 - beta2^t
};

template <typename Real>
struct KernelTable {
  Isa isa;
  Real (*dot)(const Real* a, const Real* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(Real alpha, const Real* x, Real* y, std::size_t n);
  void (*gemm_nt)(const GemmNT<Real>& args);
  void (*adam)(const AdamUpdate<Real>& args);
};

// True when the kernels were compiled in and the running CPU supports them.
bool isa_available(Isa isa);

// Widest available instruction set.
Isa best_isa();

// Kernel set used by the network and trainer. Defaults to best_isa().
Isa active_isa();
void set_active_isa(Isa isa);

// Table for a specific ISA; throws xkws::Error when it is unavailable.
template <typename Real>
const KernelTable<Real>& kernel_table(Isa isa);

template <typename Real>
const KernelTable<Real>& active_kernels() {
  return kernel_table<Real>(active_isa());
}

}  // namespace xkws::simd
