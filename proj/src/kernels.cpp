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

#include "mfrqe/kernels.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace mfrqe {
namespace kernels {
namespace {

double ScalarDot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double ScalarSum(const double* a, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i];
  return acc;
}

double ScalarTv(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += std::fabs(a[i] - b[i]);
  return 0.5 * acc;
}

double ScalarMaxAbsDiff(const double* a, const double* b, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double d = std::fabs(a[i] - b[i]);
    if (d > m) m = d;
  }
  return m;
}

void ScalarAxpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void ScalarScale(double a, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] *= a;
}

void ScalarCategoricalBatch(const double* cdf, std::size_t n_cats,
                            const double* u, std::int32_t* out,
                            std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    out[j] = CategoricalIndex(cdf, n_cats, u[j]);
  }
}

const Ops kScalarOps = {
    "scalar",       ScalarDot,   ScalarSum,
    ScalarTv,       ScalarMaxAbsDiff, ScalarAxpy,
    ScalarScale,    ScalarCategoricalBatch,
};

const Ops& Select() {
  const char* env = std::getenv("MFRQE_KERNELS");
  const char* want = (env != nullptr && env[0] != '\0') ? env : "auto";
  if (std::strcmp(want, "scalar") == 0) return kScalarOps;
  if (std::strcmp(want, "avx2") == 0) {
    if (const Ops* ops = Avx2()) return *ops;
    std::fprintf(stderr,
                 "mfrqe: MFRQE_KERNELS=avx2 requested but AVX2 is "
                 "unavailable; using scalar kernels\n");
    return kScalarOps;
  }
  if (std::strcmp(want, "neon") == 0) {
    if (const Ops* ops = Neon()) return *ops;
    std::fprintf(stderr,
                 "mfrqe: MFRQE_KERNELS=neon requested but NEON is "
                 "unavailable; using scalar kernels\n");
    return kScalarOps;
  }
  if (std::strcmp(want, "auto") != 0) {
    std::fprintf(stderr,
                 "mfrqe: unknown MFRQE_KERNELS value '%s'; using automatic "
                 "selection\n",
                 want);
  }
  if (const Ops* ops = Avx2()) return *ops;
  if (const Ops* ops = Neon()) return *ops;
  return kScalarOps;
}

}  // namespace

const Ops& Scalar() { return kScalarOps; }

const Ops& Active() {
  static const Ops& selected = Select();
  return selected;
}

}  // namespace kernels
}  // namespace mfrqe
