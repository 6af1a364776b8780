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

#include <atomic>
#include <string>

#include "tables.hpp"
#include "xkws/errors.hpp"

namespace xkws::simd {
namespace {

bool cpu_supports(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return true;
    case Isa::kAvx2:
#if defined(XKWS_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::kNeon:
#if defined(XKWS_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

std::atomic<Isa>& active_slot() {
  static std::atomic<Isa> slot{best_isa()};
  return slot;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::kScalar: return "scalar";
    case Isa::kAvx2: return "avx2";
    case Isa::kNeon: return "neon";
  }
  return "unknown";
}

Isa parse_isa(std::string_view name) {
  if (name == "scalar") return Isa::kScalar;
  if (name == "avx2") return Isa::kAvx2;
  if (name == "neon") return Isa::kNeon;
  throw Error("unknown instruction set '" + std::string(name) + "'");
}

bool isa_available(Isa isa) { return cpu_supports(isa); }

Isa best_isa() {
  if (cpu_supports(Isa::kAvx2)) return Isa::kAvx2;
  if (cpu_supports(Isa::kNeon)) return Isa::kNeon;
  return Isa::kScalar;
}

Isa active_isa() { return active_slot().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
  if (!isa_available(isa))
    throw Error("instruction set '" + std::string(isa_name(isa)) +
                "' is not available on this machine");
  active_slot().store(isa, std::memory_order_relaxed);
}

template <>
const KernelTable<float>& kernel_table<float>(Isa isa) {
  if (!isa_available(isa))
    throw Error("no kernels for '" + std::string(isa_name(isa)) + "'");
  switch (isa) {
#if defined(XKWS_HAVE_AVX2)
    case Isa::kAvx2: return detail::kAvx2F32;
#endif
#if defined(XKWS_HAVE_NEON)
    case Isa::kNeon: return detail::kNeonF32;
#endif
    default: return detail::kScalarF32;
  }
}

template <>
const KernelTable<double>& kernel_table<double>(Isa isa) {
  if (!isa_available(isa))
    throw Error("no kernels for '" + std::string(isa_name(isa)) + "'");
  switch (isa) {
#if defined(XKWS_HAVE_AVX2)
    case Isa::kAvx2: return detail::kAvx2F64;
#endif
#if defined(XKWS_HAVE_NEON)
    case Isa::kNeon: return detail::kNeonF64;
#endif
    default: return detail::kScalarF64;
  }
}

}  // namespace xkws::simd
