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
#pragma once

#include <cstddef>
#include <string_view>

// Dense inner loops of the GNN engine. Every kernel has a scalar reference
// implementation and vectorized variants; the variant is picked once at
// startup from the running CPU and can be forced with DYCO_SIMD=scalar|avx2|neon.

namespace dyco::simd {

enum class Isa { Scalar, Avx2, Neon };

std::string_view to_string(Isa isa);

/// C(m x n) = op(A)(m x k) * op(B)(k x n), row-major. With trans_a, A is
/// stored k x m; with trans_b, B is stored n x k. With accumulate, the product
/// is added to C.
using GemmFn = void (*)(int m, int n, int k, const double* a, int lda, bool trans_a,
                        const double* b, int ldb, bool trans_b, double* c, int ldc, bool accumulate);

/// Bias-corrected Adam over a flat tensor. bc1 = 1 - beta1^t, bc2 = 1 - beta2^t.
using AdamFn = void (*)(std::size_t len, double* param, double* m, double* v, const double* grad,
                        double lr, double beta1, double beta2, double eps, double bc1, double bc2);

/// y = alpha * y + beta * x.
using AxpbyFn = void (*)(std::size_t len, double alpha, double* y, double beta, const double* x);

struct Kernels {
  Isa isa;
  GemmFn gemm;
  AdamFn adam;
  AxpbyFn axpby;
};

bool isa_supported(Isa isa);

/// Kernel table for a specific ISA; throws InvalidArgument if unsupported.
const Kernels& kernels_for(Isa isa);

/// The table selected for this process.
const Kernels& active();

/// Overrides the process-wide selection (tests, benchmarks).
void set_active(Isa isa);

namespace scalar {
void gemm(int m, int n, int k, const double* a, int lda, bool trans_a, const double* b, int ldb,
          bool trans_b, double* c, int ldc, bool accumulate);
void adam(std::size_t len, double* param, double* m, double* v, const double* grad, double lr,
          double beta1, double beta2, double eps, double bc1, double bc2);
void axpby(std::size_t len, double alpha, double* y, double beta, const double* x);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
void gemm(int m, int n, int k, const double* a, int lda, bool trans_a, const double* b, int ldb,
          bool trans_b, double* c, int ldc, bool accumulate);
void adam(std::size_t len, double* param, double* m, double* v, const double* grad, double lr,
          double beta1, double beta2, double eps, double bc1, double bc2);
void axpby(std::size_t len, double alpha, double* y, double beta, const double* x);
}  // namespace avx2
#endif

#if defined(__aarch64__)
namespace neon {
void gemm(int m, int n, int k, const double* a, int lda, bool trans_a, const double* b, int ldb,
          bool trans_b, double* c, int ldc, bool accumulate);
void adam(std::size_t len, double* param, double* m, double* v, const double* grad, double lr,
          double beta1, double beta2, double eps, double bc1, double bc2);
void axpby(std::size_t len, double alpha, double* y, double beta, const double* x);
}  // namespace neon
#endif

}  // namespace dyco::simd
