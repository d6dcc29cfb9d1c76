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

#ifndef MFRQE_RISK_H_
#define MFRQE_RISK_H_

#include <span>
#include <string_view>

#include "mfrqe/dp.hpp"
#include "mfrqe/game.hpp"
#include "mfrqe/prob.hpp"

namespace mfrqe {

// Convex regularizer applied to policy rows.  Probabilities are floored at
// kLogFloor inside log terms only; rows with nonpositive entries are a
// DomainError for the log barrier (which is undefined there) but fine for
// entropy (p log p extends continuously to 0).
struct RegularizerSpec {
  enum class Kind { kEntropy, kLogBarrier };

  Kind kind = Kind::kEntropy;

  static RegularizerSpec Entropy() { return {Kind::kEntropy}; }
  static RegularizerSpec LogBarrier() { return {Kind::kLogBarrier}; }
  // Accepts "entropy" or "log_barrier"; anything else is a ConfigError.
  static RegularizerSpec FromName(std::string_view name);

  const char* name() const;

  // nu(row): sum_u p_u log p_u for entropy, -sum_u log p_u for log barrier.
  double Value(std::span<const double> row) const;
  // g += alpha * d nu / d row.
  void AddGradient(std::span<const double> row, double alpha,
                   std::span<double> g) const;
};

// Risk-aversion temperature tau and bounded-rationality weight alpha.
struct RiskParams {
  double tau = 1.0;
  double alpha = 1.0;

  // tau must be positive and finite; alpha nonnegative and finite.
  void Validate() const;
};

// A bundle of per-flow action-value rows for one (t, x): slice k holds
// Q[k](x, .).  Non-owning view over contiguous storage, k-major.
struct QStack {
  int n_slices = 0;
  int n_actions = 0;
  std::span<const double> values;  // size n_slices * n_actions

  QStack() = default;
  QStack(int n_slices_in, int n_actions_in, std::span<const double> values_in);

  std::span<const double> slice(int k) const {
    return values.subspan(static_cast<std::size_t>(k) * n_actions,
                          static_cast<std::size_t>(n_actions));
  }
};

// The risk-adjusted cost of playing `row` against the flow bundle:
//   (1/tau) * log sum_k w_k exp(-tau * <row, q_k>).
// With a single flow this collapses exactly to -<row, q> for every tau.
double RiskCost(std::span<const double> row, const QStack& q,
                std::span<const double> weights, double tau);

// RiskCost plus alpha * nu(row).
double CombinedCost(std::span<const double> row, const QStack& q,
                    std::span<const double> weights, const RiskParams& params,
                    const RegularizerSpec& reg);

// Gradient of CombinedCost with respect to the row:
//   g = -sum_k beta_k q_k + alpha * grad nu(row),
// where beta_k = w_k exp(-tau <row, q_k>) / sum_j w_j exp(-tau <row, q_j>).
// When `beta_out` is non-empty (length n_slices) the softmax weights are
// also written out.
void CostGradient(std::span<const double> row, const QStack& q,
                  std::span<const double> weights, const RiskParams& params,
                  const RegularizerSpec& reg, std::span<double> grad_out,
                  std::span<double> beta_out = {});

struct BestResponseOptions {
  // Convergence threshold on the KKT residual: the infinity norm of the
  // gradient projected onto the simplex tangent space, max_u |g_u - mean(g)|.
  double tol = 1e-8;
  int max_iters = 10000;
};

// Minimizes CombinedCost over the probability simplex by exponentiated
// gradient descent with backtracking line search (sufficient-decrease
// constant 0.5, shrink factor 0.5).  Iterates stay strictly interior, as
// both regularizers require.  Starts from the uniform row unless `start`
// (which must be strictly positive) is given.  Throws ConvergenceError,
// carrying the final residual, if the tolerance is not met within
// max_iters accepted steps.  Requires alpha > 0: without regularization the
// minimizer may sit on the boundary where no interior iterate can satisfy
// the KKT residual test.
ProbVector BestResponseRow(const QStack& q, std::span<const double> weights,
                           const RiskParams& params,
                           const RegularizerSpec& reg,
                           const BestResponseOptions& opts = {},
                           std::span<const double> start = {});

// How per-flow action values are collapsed into the row objective.
enum class QAggregate {
  kRiskLogSumExp,    // the risk-adjusted cost over all flows
  kWeightedAverage,  // the linear objective -<row, sum_k w_k q_k>
};

// The full backward optimality operator against a fixed flow set: walks
// t = T-1 .. 0, solving the per-state row subproblem at each (t, x) and
// feeding the already-optimized future rows into the per-flow continuation
// values, exactly like policy evaluation but with the row replaced by the
// CombinedCost minimizer.  When `q_out` is non-null, the per-flow action
// values under the returned policy are stored there.  ConvergenceErrors from
// row subproblems are annotated with their (t, x).
Policy BestResponsePolicy(const GameSpec& game, const FlowSet& flows,
                          std::span<const double> weights,
                          const RiskParams& params, const RegularizerSpec& reg,
                          const BestResponseOptions& opts = {},
                          QAggregate aggregate = QAggregate::kRiskLogSumExp,
                          QField* q_out = nullptr);

}  // namespace mfrqe

#endif  // MFRQE_RISK_H_
