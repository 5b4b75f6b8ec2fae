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
// NEON (AArch64) kernels; two doubles per register.
#if defined(__aarch64__)
#include <arm_neon.h>

#include <cmath>
#include <vector>

#include "dyco/simd/kernels.hpp"

namespace dyco::simd::neon {

void gemm(int m, int n, int k, const double* a, int lda, bool trans_a, const double* b, int ldb,
          bool trans_b, double* c, int ldc, bool accumulate) {
  if (trans_b) {
    std::vector<double> bt(static_cast<std::size_t>(k) * n);
    for (int j = 0; j < n; ++j)
      for (int p = 0; p < k; ++p) bt[static_cast<std::size_t>(p) * n + j] = b[static_cast<std::ptrdiff_t>(j) * ldb + p];
    gemm(m, n, k, a, lda, trans_a, bt.data(), n, false, c, ldc, accumulate);
    return;
  }
  const int n4 = n - n % 4;
  for (int i = 0; i < m; ++i) {
    double* crow = c + static_cast<std::ptrdiff_t>(i) * ldc;
    for (int j0 = 0; j0 < n4; j0 += 4) {
      float64x2_t acc0 = accumulate ? vld1q_f64(crow + j0) : vdupq_n_f64(0.0);
      float64x2_t acc1 = accumulate ? vld1q_f64(crow + j0 + 2) : vdupq_n_f64(0.0);
      for (int p = 0; p < k; ++p) {
        const double aip = trans_a ? a[static_cast<std::ptrdiff_t>(p) * lda + i]
                                   : a[static_cast<std::ptrdiff_t>(i) * lda + p];
        const double* brow = b + static_cast<std::ptrdiff_t>(p) * ldb + j0;
        acc0 = vfmaq_n_f64(acc0, vld1q_f64(brow), aip);
        acc1 = vfmaq_n_f64(acc1, vld1q_f64(brow + 2), aip);
      }
      vst1q_f64(crow + j0, acc0);
      vst1q_f64(crow + j0 + 2, acc1);
    }
    for (int j = n4; j < n; ++j) {
      double acc = accumulate ? crow[j] : 0.0;
      for (int p = 0; p < k; ++p) {
        const double aip = trans_a ? a[static_cast<std::ptrdiff_t>(p) * lda + i]
                                   : a[static_cast<std::ptrdiff_t>(i) * lda + p];
        acc = std::fma(aip, b[static_cast<std::ptrdiff_t>(p) * ldb + j], acc);
      }
      crow[j] = acc;
    }
  }
}

void adam(std::size_t len, double* param, double* m, double* v, const double* grad, double lr,
          double beta1, double beta2, double eps, double bc1, double bc2) {
  std::size_t i = 0;
  for (; i + 2 <= len; i += 2) {
    const float64x2_t g = vld1q_f64(grad + i);
    const float64x2_t mi = vfmaq_n_f64(vmulq_n_f64(g, 1.0 - beta1), vld1q_f64(m + i), beta1);
    const float64x2_t vi = vfmaq_n_f64(vmulq_n_f64(vmulq_f64(g, g), 1.0 - beta2), vld1q_f64(v + i), beta2);
    vst1q_f64(m + i, mi);
    vst1q_f64(v + i, vi);
    const float64x2_t denom = vaddq_f64(vsqrtq_f64(vdivq_f64(vi, vdupq_n_f64(bc2))), vdupq_n_f64(eps));
    const float64x2_t step = vdivq_f64(vmulq_n_f64(vdivq_f64(mi, vdupq_n_f64(bc1)), lr), denom);
    vst1q_f64(param + i, vsubq_f64(vld1q_f64(param + i), step));
  }
  for (; i < len; ++i) {
    const double g = grad[i];
    m[i] = std::fma(beta1, m[i], (1.0 - beta1) * g);
    v[i] = std::fma(beta2, v[i], (1.0 - beta2) * (g * g));
    param[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
  }
}

void axpby(std::size_t len, double alpha, double* y, double beta, const double* x) {
  std::size_t i = 0;
  for (; i + 2 <= len; i += 2)
    vst1q_f64(y + i, vaddq_f64(vmulq_n_f64(vld1q_f64(y + i), alpha), vmulq_n_f64(vld1q_f64(x + i), beta)));
  for (; i < len; ++i) y[i] = alpha * y[i] + beta * x[i];
}

}  // namespace dyco::simd::neon
#endif
