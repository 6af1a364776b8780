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

#include "xkws/simd/kernels.hpp"

namespace xkws::simd::detail {

extern const KernelTable<float> kScalarF32;
extern const KernelTable<double> kScalarF64;

#if defined(XKWS_HAVE_AVX2)
extern const KernelTable<float> kAvx2F32;
extern const KernelTable<double> kAvx2F64;
#endif

#if defined(XKWS_HAVE_NEON)
extern const KernelTable<float> kNeonF32;
extern const KernelTable<double> kNeonF64;
#endif

}  // namespace xkws::simd::detail
