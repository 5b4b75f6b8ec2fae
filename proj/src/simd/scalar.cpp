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
// Reference kernels. Built with -ffp-contract=off so results do not depend
// on the compiler fusing multiply-adds.
#include <cmath>

#include "dyco/simd/kernels.hpp"

namespace dyco::simd::scalar {

void gemm(int m, int n, int k, const double* a, int lda, bool trans_a, const double* b, int ldb,
          bool trans_b, double* c, int ldc, bool accumulate) {
  for (int i = 0; i < m; ++i) {
    double* crow = c + static_cast<std::ptrdiff_t>(i) * ldc;
    if (!accumulate)
      for (int j = 0; j < n; ++j) crow[j] = 0.0;
    for (int p = 0; p < k; ++p) {
      const double aip = trans_a ? a[static_cast<std::ptrdiff_t>(p) * lda + i]
                                 : a[static_cast<std::ptrdiff_t>(i) * lda + p];
      if (aip == 0.0) continue;
      if (trans_b) {
        for (int j = 0; j < n; ++j) crow[j] += aip * b[static_cast<std::ptrdiff_t>(j) * ldb + p];
      } else {
        const double* brow = b + static_cast<std::ptrdiff_t>(p) * ldb;
        for (int j = 0; j < n; ++j) crow[j] += aip * brow[j];
      }
    }
  }
}

void adam(std::size_t len, double* param, double* m, double* v, const double* grad, double lr,
          double beta1, double beta2, double eps, double bc1, double bc2) {
  for (std::size_t i = 0; i < len; ++i) {
    const double g = grad[i];
    m[i] = beta1 * m[i] + (1.0 - beta1) * g;
    v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
    const double m_hat = m[i] / bc1;
    const double v_hat = v[i] / bc2;
    param[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
  }
}

void axpby(std::size_t len, double alpha, double* y, double beta, const double* x) {
  for (std::size_t i = 0; i < len; ++i) y[i] = alpha * y[i] + beta * x[i];
}

}  // namespace dyco::simd::scalar
