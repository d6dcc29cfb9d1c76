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

#include "mfrqe/risk.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "mfrqe/kernels.hpp"

namespace mfrqe {
namespace {

double SeqDot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

// Infinity norm of the gradient projected onto the simplex tangent space
// {d : sum d = 0}: max_u |g_u - mean(g)|.
double KktResidual(std::span<const double> g) {
  double mean = 0.0;
  for (double v : g) mean += v;
  mean /= static_cast<double>(g.size());
  double res = 0.0;
  for (double v : g) res = std::max(res, std::fabs(v - mean));
  return res;
}

void CheckRowShape(std::span<const double> row, const QStack& q,
                   std::span<const double> weights) {
  if (q.n_slices <= 0 || q.n_actions <= 0) {
    throw ContractError("risk objective: empty action-value stack");
  }
  if (row.size() != static_cast<std::size_t>(q.n_actions)) {
    throw ContractError("risk objective: row length does not match stack");
  }
  if (weights.size() != static_cast<std::size_t>(q.n_slices)) {
    throw ContractError("risk objective: weight count does not match stack");
  }
}

}  // namespace

QStack::QStack(int n_slices_in, int n_actions_in,
               std::span<const double> values_in)
    : n_slices(n_slices_in), n_actions(n_actions_in), values(values_in) {
  if (n_slices <= 0 || n_actions <= 0) {
    throw ContractError("QStack: dimensions must be positive");
  }
  if (values.size() !=
      static_cast<std::size_t>(n_slices) * static_cast<std::size_t>(n_actions)) {
    throw ContractError("QStack: storage size does not match dimensions");
  }
}

RegularizerSpec RegularizerSpec::FromName(std::string_view name) {
  if (name == "entropy") return Entropy();
  if (name == "log_barrier") return LogBarrier();
  throw ConfigError("regularizer: unknown kind '" + std::string(name) +
                    "' (expected 'entropy' or 'log_barrier')");
}

const char* RegularizerSpec::name() const {
  return kind == Kind::kEntropy ? "entropy" : "log_barrier";
}

double RegularizerSpec::Value(std::span<const double> row) const {
  double acc = 0.0;
  switch (kind) {
    case Kind::kEntropy:
      // p log p extends continuously to p = 0 (term 0); the floor only
      // guards the log.
      for (double p : row) acc += p * std::log(std::max(p, kLogFloor));
      return acc;
    case Kind::kLogBarrier:
      for (std::size_t u = 0; u < row.size(); ++u) {
        if (row[u] <= 0.0) {
          std::ostringstream msg;
          msg << "log-barrier regularizer: row entry " << u << " is "
              << row[u] << "; the barrier is undefined on the boundary";
          throw DomainError(msg.str());
        }
        acc -= std::log(std::max(row[u], kLogFloor));
      }
      return acc;
  }
  throw ContractError("regularizer: invalid kind");
}

void RegularizerSpec::AddGradient(std::span<const double> row, double alpha,
                                  std::span<double> g) const {
  switch (kind) {
    case Kind::kEntropy:
      for (std::size_t u = 0; u < row.size(); ++u) {
        g[u] += alpha * (1.0 + std::log(std::max(row[u], kLogFloor)));
      }
      return;
    case Kind::kLogBarrier:
      for (std::size_t u = 0; u < row.size(); ++u) {
        if (row[u] <= 0.0) {
          std::ostringstream msg;
          msg << "log-barrier regularizer: row entry " << u << " is "
              << row[u] << "; the barrier is undefined on the boundary";
          throw DomainError(msg.str());
        }
        g[u] -= alpha / std::max(row[u], kLogFloor);
      }
      return;
  }
  throw ContractError("regularizer: invalid kind");
}

void RiskParams::Validate() const {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw ContractError("RiskParams: tau must be positive and finite");
  }
  if (alpha < 0.0 || !std::isfinite(alpha)) {
    throw ContractError("RiskParams: alpha must be nonnegative and finite");
  }
}

double RiskCost(std::span<const double> row, const QStack& q,
                std::span<const double> weights, double tau) {
  CheckRowShape(row, q, weights);
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw ContractError("RiskCost: tau must be positive and finite");
  }
  const auto& ops = kernels::Active();
  const int K = q.n_slices;
  if (K == 1) {
    // Single flow: the aggregation collapses to the linear cost exactly,
    // independent of tau.
    return -ops.dot(row.data(), q.slice(0).data(), row.size());
  }
  // Max-shifted evaluation via expm1/log1p: accurate both as tau -> 0
  // (where all shifted exponents are tiny) and tau -> inf (where the
  // non-maximal terms vanish).
  double s_max = -std::numeric_limits<double>::infinity();
  std::array<double, 64> small;
  std::vector<double> big;
  std::span<double> s;
  if (static_cast<std::size_t>(K) <= small.size()) {
    s = std::span<double>(small.data(), static_cast<std::size_t>(K));
  } else {
    big.resize(static_cast<std::size_t>(K));
    s = std::span<double>(big.data(), big.size());
  }
  for (int k = 0; k < K; ++k) {
    s[static_cast<std::size_t>(k)] =
        -tau * ops.dot(row.data(), q.slice(k).data(), row.size());
    s_max = std::max(s_max, s[static_cast<std::size_t>(k)]);
  }
  double rest = 0.0;
  for (int k = 0; k < K; ++k) {
    rest += weights[static_cast<std::size_t>(k)] *
            std::expm1(s[static_cast<std::size_t>(k)] - s_max);
  }
  return (s_max + std::log1p(rest)) / tau;
}

double CombinedCost(std::span<const double> row, const QStack& q,
                    std::span<const double> weights, const RiskParams& params,
                    const RegularizerSpec& reg) {
  params.Validate();
  return RiskCost(row, q, weights, params.tau) +
         params.alpha * reg.Value(row);
}

void CostGradient(std::span<const double> row, const QStack& q,
                  std::span<const double> weights, const RiskParams& params,
                  const RegularizerSpec& reg, std::span<double> grad_out,
                  std::span<double> beta_out) {
  CheckRowShape(row, q, weights);
  params.Validate();
  if (grad_out.size() != static_cast<std::size_t>(q.n_actions)) {
    throw ContractError("CostGradient: gradient output length mismatch");
  }
  if (!beta_out.empty() &&
      beta_out.size() != static_cast<std::size_t>(q.n_slices)) {
    throw ContractError("CostGradient: beta output length mismatch");
  }

  const auto& ops = kernels::Active();
  const int K = q.n_slices;
  std::fill(grad_out.begin(), grad_out.end(), 0.0);

  if (K == 1) {
    ops.axpy(-1.0, q.slice(0).data(), grad_out.data(), grad_out.size());
    if (!beta_out.empty()) beta_out[0] = 1.0;
  } else {
    std::vector<double> s(static_cast<std::size_t>(K));
    double s_max = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < K; ++k) {
      s[static_cast<std::size_t>(k)] =
          -params.tau * ops.dot(row.data(), q.slice(k).data(), row.size());
      s_max = std::max(s_max, s[static_cast<std::size_t>(k)]);
    }
    double z = 0.0;
    for (int k = 0; k < K; ++k) {
      s[static_cast<std::size_t>(k)] =
          weights[static_cast<std::size_t>(k)] *
          std::exp(s[static_cast<std::size_t>(k)] - s_max);
      z += s[static_cast<std::size_t>(k)];
    }
    for (int k = 0; k < K; ++k) {
      const double beta = s[static_cast<std::size_t>(k)] / z;
      if (!beta_out.empty()) beta_out[static_cast<std::size_t>(k)] = beta;
      ops.axpy(-beta, q.slice(k).data(), grad_out.data(), grad_out.size());
    }
  }
  reg.AddGradient(row, params.alpha, grad_out);
}

ProbVector BestResponseRow(const QStack& q, std::span<const double> weights,
                           const RiskParams& params,
                           const RegularizerSpec& reg,
                           const BestResponseOptions& opts,
                           std::span<const double> start) {
  params.Validate();
  if (!(params.alpha > 0.0)) {
    throw ContractError(
        "BestResponseRow: alpha must be positive (the unregularized "
        "objective can be minimized on the simplex boundary)");
  }
  if (opts.tol <= 0.0 || opts.max_iters <= 0) {
    throw ContractError("BestResponseRow: tol and max_iters must be positive");
  }
  const int U = q.n_actions;

  std::vector<double> p(static_cast<std::size_t>(U));
  if (start.empty()) {
    std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(U));
  } else {
    if (start.size() != static_cast<std::size_t>(U)) {
      throw ContractError("BestResponseRow: start row length mismatch");
    }
    ValidateDistribution(start, kProbConstructTol,
                         "BestResponseRow start row");
    for (double v : start) {
      if (v <= 0.0) {
        throw ContractError(
            "BestResponseRow: start row must be strictly interior");
      }
    }
    std::copy(start.begin(), start.end(), p.begin());
  }

  std::vector<double> g(static_cast<std::size_t>(U));
  std::vector<double> g_cand(static_cast<std::size_t>(U));
  std::vector<double> cand(static_cast<std::size_t>(U));

  double f = CombinedCost(p, q, weights, params, reg);
  CostGradient(p, q, weights, params, reg, g);
  double res = KktResidual(g);

  double eta = 1.0;
  constexpr double kEtaMax = 1e6;
  constexpr double kEtaMin = 1e-18;
  constexpr double kArmijo = 0.5;
  constexpr double kShrink = 0.5;
  constexpr double kPositivityFloor = 1e-300;

  for (int iter = 0; iter < opts.max_iters; ++iter) {
    if (res <= opts.tol) return ProbVector(std::move(p));

    // Exponentiated-gradient trial step with backtracking.
    bool accepted = false;
    while (eta >= kEtaMin) {
      const double g_min = *std::min_element(g.begin(), g.end());
      double z = 0.0;
      for (int u = 0; u < U; ++u) {
        // Shift by g_min so every exponent is <= 0; the factor for the
        // smallest gradient entry is exactly 1, so z >= p[argmin] > 0.
        cand[static_cast<std::size_t>(u)] =
            p[static_cast<std::size_t>(u)] *
            std::exp(-eta * (g[static_cast<std::size_t>(u)] - g_min));
        z += cand[static_cast<std::size_t>(u)];
      }
      double z2 = 0.0;
      for (int u = 0; u < U; ++u) {
        cand[static_cast<std::size_t>(u)] =
            std::max(cand[static_cast<std::size_t>(u)] / z, kPositivityFloor);
        z2 += cand[static_cast<std::size_t>(u)];
      }
      for (double& v : cand) v /= z2;

      // Centered inner product: subtracting the mean gradient changes
      // nothing in exact arithmetic (cand - p sums to zero) but keeps the
      // descent test meaningful when the candidate step is tiny — the raw
      // mean-gradient component would couple with the O(eps) normalization
      // rounding of the two rows and swamp the true directional term.
      double g_mean = 0.0;
      for (int u = 0; u < U; ++u) g_mean += g[static_cast<std::size_t>(u)];
      g_mean /= static_cast<double>(U);
      double dir = 0.0;
      for (int u = 0; u < U; ++u) {
        dir += (g[static_cast<std::size_t>(u)] - g_mean) *
               (cand[static_cast<std::size_t>(u)] -
                p[static_cast<std::size_t>(u)]);
      }
      if (dir < 0.0) {
        // Once the predicted decrease falls below the floating-point
        // resolution of f, the sufficient-decrease comparison is rounding
        // noise; in that regime demand strict progress in the termination
        // quantity itself (the KKT residual), which stays resolvable at
        // every scale.
        const double noise =
            4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::fabs(f));
        if (-kArmijo * dir >= noise) {
          const double f_cand = CombinedCost(cand, q, weights, params, reg);
          if (f_cand <= f + kArmijo * dir) {
            p.swap(cand);
            f = f_cand;
            accepted = true;
            break;
          }
        } else {
          CostGradient(cand, q, weights, params, reg, g_cand);
          if (KktResidual(g_cand) <= res * (1.0 - 1e-3)) {
            p.swap(cand);
            f = CombinedCost(p, q, weights, params, reg);
            accepted = true;
            break;
          }
        }
      }
      eta *= kShrink;
    }
    if (!accepted) {
      std::ostringstream msg;
      msg << "BestResponseRow: line search stalled at residual " << res
          << " (tol " << opts.tol << ")";
      throw ConvergenceError(msg.str(), res, -1, -1);
    }
    eta = std::min(eta * 2.0, kEtaMax);
    CostGradient(p, q, weights, params, reg, g);
    res = KktResidual(g);
  }
  if (res <= opts.tol) return ProbVector(std::move(p));
  std::ostringstream msg;
  msg << "BestResponseRow: residual " << res << " after " << opts.max_iters
      << " iterations (tol " << opts.tol << ")";
  throw ConvergenceError(msg.str(), res, -1, -1);
}

Policy BestResponsePolicy(const GameSpec& game, const FlowSet& flows,
                          std::span<const double> weights,
                          const RiskParams& params, const RegularizerSpec& reg,
                          const BestResponseOptions& opts, QAggregate aggregate,
                          QField* q_out) {
  game.Validate();
  params.Validate();
  if (flows.size() == 0) {
    throw ContractError("BestResponsePolicy: empty flow set");
  }
  if (weights.size() != static_cast<std::size_t>(flows.size())) {
    throw ContractError("BestResponsePolicy: weight count does not match flows");
  }
  ValidateDistribution(weights, kProbConstructTol,
                       "BestResponsePolicy flow weights");
  for (int k = 0; k < flows.size(); ++k) {
    if (flows.flows[k].horizon() != game.horizon ||
        flows.flows[k].n_states() != game.n_states) {
      throw ContractError("BestResponsePolicy: flow shape does not match game");
    }
  }

  const int K = flows.size();
  const int T = game.horizon;
  const int X = game.n_states;
  const int U = game.n_actions;

  Policy policy(T, X, U);
  QField q(K, T, X, U);
  VField v(K, T, X);
  std::vector<double> trans(static_cast<std::size_t>(X));
  std::vector<double> avg_row(static_cast<std::size_t>(U));
  std::vector<double> stack_buf(static_cast<std::size_t>(K) * U);
  const double unit_weight = 1.0;

  for (int t = T - 1; t >= 0; --t) {
    for (int x = 0; x < X; ++x) {
      // Per-flow action values at (t, x) under the already-optimized future
      // rows.
      for (int k = 0; k < K; ++k) {
        const std::span<const double> mu = flows.flows[k].slice(t);
        const std::span<double> q_row = q.mutable_slice(k, t, x);
        for (int u = 0; u < U; ++u) {
          double value = EvalRewardChecked(game, t, x, u, mu);
          if (t + 1 < T) {
            EvalTransitionChecked(game, t, x, u, mu, trans);
            value += SeqDot({trans.data(), trans.size()}, v.slice(k, t + 1));
          }
          q_row[static_cast<std::size_t>(u)] = value;
        }
      }

      // Row subproblem.
      ProbVector row;
      try {
        if (aggregate == QAggregate::kRiskLogSumExp) {
          for (int k = 0; k < K; ++k) {
            const std::span<const double> q_row = q.slice(k, t, x);
            std::copy(q_row.begin(), q_row.end(),
                      stack_buf.begin() + static_cast<std::size_t>(k) * U);
          }
          row = BestResponseRow(
              QStack(K, U, {stack_buf.data(), stack_buf.size()}), weights,
              params, reg, opts);
        } else {
          std::fill(avg_row.begin(), avg_row.end(), 0.0);
          for (int k = 0; k < K; ++k) {
            const std::span<const double> q_row = q.slice(k, t, x);
            const double w = weights[static_cast<std::size_t>(k)];
            for (int u = 0; u < U; ++u) {
              avg_row[static_cast<std::size_t>(u)] +=
                  w * q_row[static_cast<std::size_t>(u)];
            }
          }
          row = BestResponseRow(
              QStack(1, U, {avg_row.data(), avg_row.size()}),
              std::span<const double>(&unit_weight, 1), params, reg, opts);
        }
      } catch (const ConvergenceError& e) {
        std::ostringstream msg;
        msg << e.what() << " [row subproblem at t=" << t << ", x=" << x << "]";
        throw ConvergenceError(msg.str(), e.residual(), t, x);
      }
      policy.SetRow(t, x, row.span());
      for (int k = 0; k < K; ++k) {
        v.at(k, t, x) = SeqDot(row.span(), q.slice(k, t, x));
      }
    }
  }
  if (q_out != nullptr) *q_out = std::move(q);
  return policy;
}

}  // namespace mfrqe
