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
// AVX2 + FMA kernels. This translation unit is compiled with -mavx2 -mfma and
// must only be entered after the runtime CPU check in dispatch.cpp.
#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <new>

#include "dyco/simd/kernels.hpp"

namespace dyco::simd::avx2 {

namespace {

constexpr int kRows = 6;

// 6 x 8 register tile: C rows [0, rows) += packed A block (k x 6) * packed
// B panel (k x 8). Rows past `rows` are zero padding and are not stored.
inline void tile_6x8(int k, const double* ablock, const double* panel, double* c, int ldc, int rows,
                     bool accumulate) {
  __m256d acc[kRows][2];
  for (int r = 0; r < kRows; ++r) {
    if (accumulate && r < rows) {
      acc[r][0] = _mm256_loadu_pd(c + static_cast<std::ptrdiff_t>(r) * ldc);
      acc[r][1] = _mm256_loadu_pd(c + static_cast<std::ptrdiff_t>(r) * ldc + 4);
    } else {
      acc[r][0] = _mm256_setzero_pd();
      acc[r][1] = _mm256_setzero_pd();
    }
  }
  for (int p = 0; p < k; ++p) {
    const __m256d b0 = _mm256_load_pd(panel + 8 * p);
    const __m256d b1 = _mm256_load_pd(panel + 8 * p + 4);
    const double* ap = ablock + kRows * p;
    for (int r = 0; r < kRows; ++r) {
      const __m256d av = _mm256_broadcast_sd(ap + r);
      acc[r][0] = _mm256_fmadd_pd(av, b0, acc[r][0]);
      acc[r][1] = _mm256_fmadd_pd(av, b1, acc[r][1]);
    }
  }
  for (int r = 0; r < rows; ++r) {
    _mm256_storeu_pd(c + static_cast<std::ptrdiff_t>(r) * ldc, acc[r][0]);
    _mm256_storeu_pd(c + static_cast<std::ptrdiff_t>(r) * ldc + 4, acc[r][1]);
  }
}

// op(A) as consecutive blocks of 6 rows, each stored k x 6 (zero padded).
inline void pack_a(int m, int k, const double* a, int lda, bool trans_a, double* out) {
  for (int i0 = 0; i0 < m; i0 += kRows) {
    const int rows = std::min(kRows, m - i0);
    double* block = out + static_cast<std::ptrdiff_t>(i0) * k;
    for (int p = 0; p < k; ++p) {
      double* dst = block + kRows * p;
      for (int r = 0; r < kRows; ++r) {
        if (r >= rows) {
          dst[r] = 0.0;
        } else {
          dst[r] = trans_a ? a[static_cast<std::ptrdiff_t>(p) * lda + i0 + r]
                           : a[static_cast<std::ptrdiff_t>(i0 + r) * lda + p];
        }
      }
    }
  }
}

// Copies the k x width slice of op(B) at column j0 into a zero-padded k x 8 panel.
inline void pack_panel(int k, const double* b, int ldb, bool trans_b, int j0, int width, double* panel) {
  if (trans_b) {
    for (int p = 0; p < k; ++p)
      for (int j = 0; j < 8; ++j) panel[8 * p + j] = j < width ? b[static_cast<std::ptrdiff_t>(j0 + j) * ldb + p] : 0.0;
    return;
  }
  for (int p = 0; p < k; ++p) {
    const double* brow = b + static_cast<std::ptrdiff_t>(p) * ldb + j0;
    double* dst = panel + 8 * p;
    if (width == 8) {
      _mm256_store_pd(dst, _mm256_loadu_pd(brow));
      _mm256_store_pd(dst + 4, _mm256_loadu_pd(brow + 4));
    } else {
      for (int j = 0; j < 8; ++j) dst[j] = j < width ? brow[j] : 0.0;
    }
  }
}

struct AlignedBuffer {
  double* data = nullptr;
  std::size_t capacity = 0;
  ~AlignedBuffer() { std::free(data); }
  double* reserve(std::size_t n) {
    if (n > capacity) {
      std::free(data);
      capacity = (n + 7) & ~std::size_t{7};
      data = static_cast<double*>(std::aligned_alloc(32, capacity * sizeof(double)));
      if (!data) throw std::bad_alloc();
    }
    return data;
  }
};

}  // namespace

void gemm(int m, int n, int k, const double* a, int lda, bool trans_a, const double* b, int ldb,
          bool trans_b, double* c, int ldc, bool accumulate) {
  if (m <= 0 || n <= 0) return;
  if (k <= 0) {
    if (!accumulate)
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) c[static_cast<std::ptrdiff_t>(i) * ldc + j] = 0.0;
    return;
  }
  const int m_padded = (m + kRows - 1) / kRows * kRows;
  thread_local AlignedBuffer a_buffer, b_buffer;
  double* apack = a_buffer.reserve(static_cast<std::size_t>(m_padded) * k);
  double* panel = b_buffer.reserve(static_cast<std::size_t>(k) * 8);
  pack_a(m, k, a, lda, trans_a, apack);
  alignas(32) double edge[kRows * 8];
  for (int j0 = 0; j0 < n; j0 += 8) {
    const int width = std::min(8, n - j0);
    pack_panel(k, b, ldb, trans_b, j0, width, panel);
    for (int i0 = 0; i0 < m; i0 += kRows) {
      const int rows = std::min(kRows, m - i0);
      const double* ablock = apack + static_cast<std::ptrdiff_t>(i0) * k;
      double* ctile = c + static_cast<std::ptrdiff_t>(i0) * ldc + j0;
      if (width == 8) {
        tile_6x8(k, ablock, panel, ctile, ldc, rows, accumulate);
        continue;
      }
      for (int r = 0; r < rows; ++r)
        for (int j = 0; j < 8; ++j)
          edge[8 * r + j] = accumulate && j < width ? ctile[static_cast<std::ptrdiff_t>(r) * ldc + j] : 0.0;
      tile_6x8(k, ablock, panel, edge, 8, rows, accumulate);
      for (int r = 0; r < rows; ++r)
        for (int j = 0; j < width; ++j) ctile[static_cast<std::ptrdiff_t>(r) * ldc + j] = edge[8 * r + j];
    }
  }
}

void adam(std::size_t len, double* param, double* m, double* v, const double* grad, double lr,
          double beta1, double beta2, double eps, double bc1, double bc2) {
  const __m256d vb1 = _mm256_set1_pd(beta1), vb1c = _mm256_set1_pd(1.0 - beta1);
  const __m256d vb2 = _mm256_set1_pd(beta2), vb2c = _mm256_set1_pd(1.0 - beta2);
  // lr * (m / bc1) / (sqrt(v / bc2) + eps) with the constant divisions folded.
  const __m256d vstep = _mm256_set1_pd(lr / bc1), vscale = _mm256_set1_pd(1.0 / std::sqrt(bc2));
  const __m256d veps = _mm256_set1_pd(eps);
  std::size_t i = 0;
  for (; i + 4 <= len; i += 4) {
    const __m256d g = _mm256_loadu_pd(grad + i);
    const __m256d mi = _mm256_fmadd_pd(vb1, _mm256_loadu_pd(m + i), _mm256_mul_pd(vb1c, g));
    const __m256d vi = _mm256_fmadd_pd(vb2, _mm256_loadu_pd(v + i), _mm256_mul_pd(vb2c, _mm256_mul_pd(g, g)));
    _mm256_storeu_pd(m + i, mi);
    _mm256_storeu_pd(v + i, vi);
    const __m256d denom = _mm256_fmadd_pd(_mm256_sqrt_pd(vi), vscale, veps);
    const __m256d step = _mm256_div_pd(_mm256_mul_pd(vstep, mi), denom);
    _mm256_storeu_pd(param + i, _mm256_sub_pd(_mm256_loadu_pd(param + i), step));
  }
  for (; i < len; ++i) {
    const double g = grad[i];
    m[i] = std::fma(beta1, m[i], (1.0 - beta1) * g);
    v[i] = std::fma(beta2, v[i], (1.0 - beta2) * (g * g));
    param[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
  }
}

void axpby(std::size_t len, double alpha, double* y, double beta, const double* x) {
  const __m256d va = _mm256_set1_pd(alpha), vb = _mm256_set1_pd(beta);
  std::size_t i = 0;
  for (; i + 4 <= len; i += 4) {
    const __m256d r = _mm256_add_pd(_mm256_mul_pd(va, _mm256_loadu_pd(y + i)),
                                    _mm256_mul_pd(vb, _mm256_loadu_pd(x + i)));
    _mm256_storeu_pd(y + i, r);
  }
  for (; i < len; ++i) y[i] = alpha * y[i] + beta * x[i];
}

}  // namespace dyco::simd::avx2
