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

// NEON kernel variants (AArch64, where NEON is part of the baseline ISA).
// On other targets this translation unit reports the variant as unavailable.

#include "mfrqe/kernels.hpp"

#if defined(__aarch64__) && defined(__ARM_NEON)

#include <arm_neon.h>

#include <cmath>

namespace mfrqe {
namespace kernels {
namespace {

double NeonDot(const double* a, const double* b, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    acc = vaddq_f64(acc, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  }
  double r = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
  for (; i < n; ++i) r += a[i] * b[i];
  return r;
}

double NeonSum(const double* a, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    acc = vaddq_f64(acc, vld1q_f64(a + i));
  }
  double r = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
  for (; i < n; ++i) r += a[i];
  return r;
}

double NeonTv(const double* a, const double* b, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    acc = vaddq_f64(acc, vabdq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  }
  double r = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
  for (; i < n; ++i) r += std::fabs(a[i] - b[i]);
  return 0.5 * r;
}

double NeonMaxAbsDiff(const double* a, const double* b, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    acc = vmaxq_f64(acc, vabdq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  }
  double m = vgetq_lane_f64(acc, 0);
  if (vgetq_lane_f64(acc, 1) > m) m = vgetq_lane_f64(acc, 1);
  for (; i < n; ++i) {
    double d = std::fabs(a[i] - b[i]);
    if (d > m) m = d;
  }
  return m;
}

void NeonAxpy(double a, const double* x, double* y, std::size_t n) {
  const float64x2_t av = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i),
                               vmulq_f64(av, vld1q_f64(x + i))));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void NeonScale(double a, double* y, std::size_t n) {
  const float64x2_t av = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(y + i, vmulq_f64(av, vld1q_f64(y + i)));
  }
  for (; i < n; ++i) y[i] *= a;
}

void NeonCategoricalBatch(const double* cdf, std::size_t n_cats,
                          const double* u, std::int32_t* out, std::size_t n) {
  const float64x2_t one = vdupq_n_f64(1.0);
  std::size_t j = 0;
  for (; j + 2 <= n; j += 2) {
    const float64x2_t uv = vld1q_f64(u + j);
    float64x2_t acc = vdupq_n_f64(0.0);
    for (std::size_t c = 0; c + 1 < n_cats; ++c) {
      // Same predicate as the scalar reference: u >= cdf[c].
      uint64x2_t ge = vcgeq_f64(uv, vdupq_n_f64(cdf[c]));
      acc = vaddq_f64(acc, vreinterpretq_f64_u64(vandq_u64(
                               ge, vreinterpretq_u64_f64(one))));
    }
    out[j + 0] = static_cast<std::int32_t>(vgetq_lane_f64(acc, 0));
    out[j + 1] = static_cast<std::int32_t>(vgetq_lane_f64(acc, 1));
  }
  for (; j < n; ++j) out[j] = CategoricalIndex(cdf, n_cats, u[j]);
}

const Ops kNeonOps = {
    "neon",     NeonDot,   NeonSum,
    NeonTv,     NeonMaxAbsDiff, NeonAxpy,
    NeonScale,  NeonCategoricalBatch,
};

}  // namespace

const Ops* Neon() { return &kNeonOps; }

}  // namespace kernels
}  // namespace mfrqe

#else  // !(__aarch64__ && __ARM_NEON)

namespace mfrqe {
namespace kernels {

const Ops* Neon() { return nullptr; }

}  // namespace kernels
}  // namespace mfrqe

#endif
