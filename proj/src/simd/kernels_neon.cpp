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

// AArch64 Advanced SIMD variant. NEON is architecturally mandatory on
// AArch64, so no runtime probe is needed beyond the build-time check.

#include <arm_neon.h>

#include "generic_kernels.hpp"
#include "tables.hpp"

namespace xkws::simd::detail {
namespace {

struct NeonF32 {
  using Scalar = float;
  using Reg = float32x4_t;
  static constexpr std::size_t kWidth = 4;
  static Reg zero() { return vdupq_n_f32(0.0f); }
  static Reg set1(float x) { return vdupq_n_f32(x); }
  static Reg load(const float* p) { return vld1q_f32(p); }
  static void store(float* p, Reg r) { vst1q_f32(p, r); }
  static Reg fmadd(Reg a, Reg b, Reg c) { return vfmaq_f32(c, a, b); }
  static Reg add(Reg a, Reg b) { return vaddq_f32(a, b); }
  static Reg sub(Reg a, Reg b) { return vsubq_f32(a, b); }
  static Reg mul(Reg a, Reg b) { return vmulq_f32(a, b); }
  static Reg div(Reg a, Reg b) { return vdivq_f32(a, b); }
  static Reg sqrt(Reg a) { return vsqrtq_f32(a); }
  static float hsum(Reg r) { return vaddvq_f32(r); }
};

struct NeonF64 {
  using Scalar = double;
  using Reg = float64x2_t;
  static constexpr std::size_t kWidth = 2;
  static Reg zero() { return vdupq_n_f64(0.0); }
  static Reg set1(double x) { return vdupq_n_f64(x); }
  static Reg load(const double* p) { return vld1q_f64(p); }
  static void store(double* p, Reg r) { vst1q_f64(p, r); }
  static Reg fmadd(Reg a, Reg b, Reg c) { return vfmaq_f64(c, a, b); }
  static Reg add(Reg a, Reg b) { return vaddq_f64(a, b); }
  static Reg sub(Reg a, Reg b) { return vsubq_f64(a, b); }
  static Reg mul(Reg a, Reg b) { return vmulq_f64(a, b); }
  static Reg div(Reg a, Reg b) { return vdivq_f64(a, b); }
  static Reg sqrt(Reg a) { return vsqrtq_f64(a); }
  static double hsum(Reg r) { return vaddvq_f64(r); }
};

}  // namespace

const KernelTable<float> kNeonF32 = make_table<NeonF32>(Isa::kNeon);
const KernelTable<double> kNeonF64 = make_table<NeonF64>(Isa::kNeon);

}  // namespace xkws::simd::detail
