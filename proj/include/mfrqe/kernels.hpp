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

#ifndef MFRQE_KERNELS_H_
#define MFRQE_KERNELS_H_

#include <cstddef>
#include <cstdint>

namespace mfrqe {
namespace kernels {

// Data-parallel primitives with scalar reference implementations and SIMD
// variants (AVX2 on x86-64, NEON on AArch64) selected once per process at
// runtime.  Vector reductions may differ from the scalar reference in the
// last few ulps (different accumulation trees); categorical sampling is
// bitwise identical across implementations because every comparison is
// exact.  Set MFRQE_KERNELS=scalar|avx2|neon|auto to override selection.
struct Ops {
  const char* name;

  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // sum_i a[i]
  double (*sum)(const double* a, std::size_t n);
  // 0.5 * sum_i |a[i] - b[i]|  (total variation when a, b are distributions)
  double (*tv_distance)(const double* a, const double* b, std::size_t n);
  // max_i |a[i] - b[i]|
  double (*max_abs_diff)(const double* a, const double* b, std::size_t n);
  // y[i] += a * x[i]
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // y[i] *= a
  void (*scale)(double a, double* y, std::size_t n);
  // For each sample j: out[j] = |{ c < n_cats - 1 : u[j] >= cdf[c] }|, the
  // index drawn from the categorical distribution with inclusive cumulative
  // weights cdf[0..n_cats-1] (cdf[n_cats-1] ~ 1) at uniform variate u[j].
  void (*categorical_batch)(const double* cdf, std::size_t n_cats,
                            const double* u, std::int32_t* out, std::size_t n);
};

// Reference implementation; always available.
const Ops& Scalar();

// SIMD variants; null when the build target or the running CPU lacks them.
const Ops* Avx2();
const Ops* Neon();

// The per-process selection (honors the MFRQE_KERNELS environment variable;
// unknown or unavailable choices fall back to scalar with a warning).
const Ops& Active();

// Single-sample version of categorical_batch; shared by scalar kernels and
// SIMD remainder loops so every implementation resolves ties identically.
inline std::int32_t CategoricalIndex(const double* cdf, std::size_t n_cats,
                                     double u) {
  std::int32_t idx = 0;
  for (std::size_t c = 0; c + 1 < n_cats; ++c) {
    idx += (u >= cdf[c]) ? 1 : 0;
  }
  return idx;
}

}  // namespace kernels
}  // namespace mfrqe

#endif  // MFRQE_KERNELS_H_
