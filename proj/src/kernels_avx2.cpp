// Copyright 2026 The mfrqe Authors.
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

// AVX2 kernel variants.  This translation unit is built with -mavx2 on
// x86-64; everywhere else it compiles to a stub that reports the variant as
// unavailable.  Callers must go through kernels::Active(), which performs the
// runtime CPU check before handing out this table.

#include "mfrqe/kernels.hpp"

#if defined(__AVX2__)

#include <immintrin.h>

#include <cmath>

namespace mfrqe {
namespace kernels {
namespace {

inline double HSum(__m256d v) {
  // Fixed lane order: (l0 + l1) + (l2 + l3).
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, v);
  return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

inline __m256d Abs(__m256d v) {
  return _mm256_andnot_pd(_mm256_set1_pd(-0.0), v);
}

double Avx2Dot(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_add_pd(
        acc, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  double r = HSum(acc);
  for (; i < n; ++i) r += a[i] * b[i];
  return r;
}

double Avx2Sum(const double* a, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
  }
  double r = HSum(acc);
  for (; i < n; ++i) r += a[i];
  return r;
}

double Avx2Tv(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_add_pd(
        acc,
        Abs(_mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i))));
  }
  double r = HSum(acc);
  for (; i < n; ++i) r += std::fabs(a[i] - b[i]);
  return 0.5 * r;
}

double Avx2MaxAbsDiff(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_max_pd(
        acc,
        Abs(_mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i))));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double m = lanes[0];
  if (lanes[1] > m) m = lanes[1];
  if (lanes[2] > m) m = lanes[2];
  if (lanes[3] > m) m = lanes[3];
  for (; i < n; ++i) {
    double d = std::fabs(a[i] - b[i]);
    if (d > m) m = d;
  }
  return m;
}

void Avx2Axpy(double a, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d yi = _mm256_loadu_pd(y + i);
    yi = _mm256_add_pd(yi, _mm256_mul_pd(av, _mm256_loadu_pd(x + i)));
    _mm256_storeu_pd(y + i, yi);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void Avx2Scale(double a, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_mul_pd(av, _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] *= a;
}

void Avx2CategoricalBatch(const double* cdf, std::size_t n_cats,
                          const double* u, std::int32_t* out, std::size_t n) {
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d uv = _mm256_loadu_pd(u + j);
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t c = 0; c + 1 < n_cats; ++c) {
      // Same predicate as the scalar reference: u >= cdf[c].
      __m256d ge = _mm256_cmp_pd(uv, _mm256_set1_pd(cdf[c]), _CMP_GE_OQ);
      acc = _mm256_add_pd(acc, _mm256_and_pd(ge, one));
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    out[j + 0] = static_cast<std::int32_t>(lanes[0]);
    out[j + 1] = static_cast<std::int32_t>(lanes[1]);
    out[j + 2] = static_cast<std::int32_t>(lanes[2]);
    out[j + 3] = static_cast<std::int32_t>(lanes[3]);
  }
  for (; j < n; ++j) out[j] = CategoricalIndex(cdf, n_cats, u[j]);
}

const Ops kAvx2Ops = {
    "avx2",     Avx2Dot,   Avx2Sum,
    Avx2Tv,     Avx2MaxAbsDiff, Avx2Axpy,
    Avx2Scale,  Avx2CategoricalBatch,
};

}  // namespace

const Ops* Avx2() {
  return __builtin_cpu_supports("avx2") ? &kAvx2Ops : nullptr;
}

}  // namespace kernels
}  // namespace mfrqe

#else  // !defined(__AVX2__)

namespace mfrqe {
namespace kernels {

const Ops* Avx2() { return nullptr; }

}  // namespace kernels
}  // namespace mfrqe

#endif  // defined(__AVX2__)
