// Copyright 2026 The dyco Authors. All Rights Reserved.
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
#include <cstdlib>
#include <string>

#include "dyco/error.hpp"
#include "dyco/simd/kernels.hpp"

namespace dyco::simd {

namespace {

constexpr Kernels kScalar{Isa::Scalar, &scalar::gemm, &scalar::adam, &scalar::axpby};
#if defined(__x86_64__) || defined(_M_X64)
constexpr Kernels kAvx2{Isa::Avx2, &avx2::gemm, &avx2::adam, &avx2::axpby};
#endif
#if defined(__aarch64__)
constexpr Kernels kNeon{Isa::Neon, &neon::gemm, &neon::adam, &neon::axpby};
#endif

Isa best_supported() {
  if (isa_supported(Isa::Avx2)) return Isa::Avx2;
  if (isa_supported(Isa::Neon)) return Isa::Neon;
  return Isa::Scalar;
}

Isa initial_isa() {
  if (const char* env = std::getenv("DYCO_SIMD")) {
    const std::string want(env);
    if (want == "scalar") return Isa::Scalar;
    if (want == "avx2" && isa_supported(Isa::Avx2)) return Isa::Avx2;
    if (want == "neon" && isa_supported(Isa::Neon)) return Isa::Neon;
  }
  return best_supported();
}

std::atomic<const Kernels*>& slot() {
  static std::atomic<const Kernels*> current{&kernels_for(initial_isa())};
  return current;
}

}  // namespace

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return "scalar";
    case Isa::Avx2:
      return "avx2";
    case Isa::Neon:
      return "neon";
  }
  return "?";
}

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
#if (defined(__x86_64__) || defined(_M_X64)) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::Neon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const Kernels& kernels_for(Isa isa) {
  if (!isa_supported(isa))
    throw InvalidArgument("SIMD variant '" + std::string(to_string(isa)) + "' is not supported on this CPU");
  switch (isa) {
#if defined(__x86_64__) || defined(_M_X64)
    case Isa::Avx2:
      return kAvx2;
#endif
#if defined(__aarch64__)
    case Isa::Neon:
      return kNeon;
#endif
    default:
      return kScalar;
  }
}

const Kernels& active() { return *slot().load(std::memory_order_acquire); }

void set_active(Isa isa) { slot().store(&kernels_for(isa), std::memory_order_release); }

}  // namespace dyco::simd
