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

#include "mfrqe/game.hpp"

#include <cmath>
#include <sstream>

#include "mfrqe/kernels.hpp"

namespace mfrqe {
namespace {

// Sequential sum in ascending index order.  Flow propagation and its drift
// repair use this fixed order (rather than a SIMD reduction) so that flows
// are bitwise identical regardless of kernel selection and thread count.
double SeqSum(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc;
}

void CheckDims(const GameSpec& game, const Policy& policy) {
  if (policy.horizon() != game.horizon ||
      policy.n_states() != game.n_states ||
      policy.n_actions() != game.n_actions) {
    std::ostringstream msg;
    msg << "policy shape (T=" << policy.horizon() << ", X="
        << policy.n_states() << ", U=" << policy.n_actions()
        << ") does not match game '" << game.name << "' (T=" << game.horizon
        << ", X=" << game.n_states << ", U=" << game.n_actions << ")";
    throw ContractError(msg.str());
  }
}

}  // namespace

void GameSpec::Validate() const {
  if (n_states <= 0 || n_actions <= 0 || horizon <= 0) {
    std::ostringstream msg;
    msg << "game '" << name << "': n_states, n_actions and horizon must be "
        << "positive (got " << n_states << ", " << n_actions << ", "
        << horizon << ")";
    throw ContractError(msg.str());
  }
  if (!(r_max > 0.0) || !std::isfinite(r_max)) {
    throw ContractError("game '" + name + "': r_max must be positive and finite");
  }
  if (!transition || !reward) {
    throw ContractError("game '" + name +
                        "': transition and reward evaluators must be set");
  }
  if (!state_labels.empty() &&
      state_labels.size() != static_cast<std::size_t>(n_states)) {
    throw ContractError("game '" + name + "': state_labels size mismatch");
  }
  if (!action_labels.empty() &&
      action_labels.size() != static_cast<std::size_t>(n_actions)) {
    throw ContractError("game '" + name + "': action_labels size mismatch");
  }
}

Policy::Policy(int horizon, int n_states, int n_actions)
    : horizon_(horizon), n_states_(n_states), n_actions_(n_actions) {
  if (horizon <= 0 || n_states <= 0 || n_actions <= 0) {
    throw ContractError("Policy: horizon, n_states, n_actions must be positive");
  }
  data_.assign(static_cast<std::size_t>(horizon) * n_states * n_actions, 0.0);
}

Policy Policy::Uniform(int horizon, int n_states, int n_actions) {
  Policy p(horizon, n_states, n_actions);
  const double w = 1.0 / static_cast<double>(n_actions);
  for (double& v : p.data_) v = w;
  return p;
}

std::span<const double> Policy::row(int t, int x) const {
  return {data_.data() + index(t, x), static_cast<std::size_t>(n_actions_)};
}

std::span<double> Policy::mutable_row(int t, int x) {
  return {data_.data() + index(t, x), static_cast<std::size_t>(n_actions_)};
}

void Policy::SetRow(int t, int x, std::span<const double> row) {
  if (t < 0 || t >= horizon_ || x < 0 || x >= n_states_) {
    throw ContractError("Policy::SetRow: (t, x) out of range");
  }
  if (row.size() != static_cast<std::size_t>(n_actions_)) {
    throw ContractError("Policy::SetRow: row length mismatch");
  }
  std::ostringstream what;
  what << "policy row (t=" << t << ", x=" << x << ")";
  ValidateDistribution(row, kProbConstructTol, what.str());
  std::copy(row.begin(), row.end(), data_.begin() + index(t, x));
}

void Policy::ValidateRows(double sum_tol) const {
  for (int t = 0; t < horizon_; ++t) {
    for (int x = 0; x < n_states_; ++x) {
      std::ostringstream what;
      what << "policy row (t=" << t << ", x=" << x << ")";
      ValidateDistribution(row(t, x), sum_tol, what.str());
    }
  }
}

InitialSet::InitialSet(std::vector<ProbVector> initials_in,
                       ProbVector weights_in)
    : initials(std::move(initials_in)), weights(std::move(weights_in)) {
  if (initials.empty()) {
    throw ContractError("InitialSet: at least one initial distribution");
  }
  if (weights.size() != static_cast<int>(initials.size())) {
    std::ostringstream msg;
    msg << "InitialSet: " << initials.size() << " initial distributions but "
        << weights.size() << " weights";
    throw ContractError(msg.str());
  }
  const int n = initials[0].size();
  for (std::size_t k = 1; k < initials.size(); ++k) {
    if (initials[k].size() != n) {
      std::ostringstream msg;
      msg << "InitialSet: initial distribution " << k << " has "
          << initials[k].size() << " states; expected " << n;
      throw ContractError(msg.str());
    }
  }
}

MeanFieldFlow::MeanFieldFlow(int horizon, int n_states)
    : horizon_(horizon), n_states_(n_states) {
  if (horizon <= 0 || n_states <= 0) {
    throw ContractError("MeanFieldFlow: horizon and n_states must be positive");
  }
  data_.assign(static_cast<std::size_t>(horizon + 1) * n_states, 0.0);
}

std::span<const double> MeanFieldFlow::slice(int t) const {
  return {data_.data() + static_cast<std::size_t>(t) * n_states_,
          static_cast<std::size_t>(n_states_)};
}

std::span<double> MeanFieldFlow::mutable_slice(int t) {
  return {data_.data() + static_cast<std::size_t>(t) * n_states_,
          static_cast<std::size_t>(n_states_)};
}

void EvalTransitionChecked(const GameSpec& game, int t, int x, int u,
                           std::span<const double> mu, std::span<double> out) {
  game.transition(t, x, u, mu, out);
  double sum = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!std::isfinite(out[i]) || out[i] < 0.0) {
      std::ostringstream msg;
      msg << "game '" << game.name << "': transition (t=" << t << ", x=" << x
          << ", u=" << u << ") produced invalid probability " << out[i]
          << " for next state " << i;
      throw ModelError(msg.str(), t, x, u);
    }
    sum += out[i];
  }
  const double drift = std::fabs(sum - 1.0);
  if (drift > kProbDriftTol) {
    std::ostringstream msg;
    msg << "game '" << game.name << "': transition (t=" << t << ", x=" << x
        << ", u=" << u << ") sums to " << sum << "; |sum - 1| = " << drift
        << " exceeds the drift tolerance " << kProbDriftTol;
    throw ModelError(msg.str(), t, x, u);
  }
  if (drift > 0.0) {
    const double inv = 1.0 / sum;
    for (double& v : out) v *= inv;
  }
}

double EvalRewardChecked(const GameSpec& game, int t, int x, int u,
                         std::span<const double> mu) {
  const double r = game.reward(t, x, u, mu);
  // Slack of one drift tolerance keeps rewards computed from renormalized
  // population slices from tripping the bound.
  if (!std::isfinite(r) || std::fabs(r) > game.r_max + kProbDriftTol) {
    std::ostringstream msg;
    msg << "game '" << game.name << "': reward (t=" << t << ", x=" << x
        << ", u=" << u << ") is " << r << "; |r| must not exceed r_max = "
        << game.r_max;
    throw ModelError(msg.str(), t, x, u);
  }
  return r;
}

MeanFieldFlow PropagateFlow(const GameSpec& game, const Policy& policy,
                            const ProbVector& mu0) {
  game.Validate();
  CheckDims(game, policy);
  if (mu0.size() != game.n_states) {
    throw ContractError("PropagateFlow: initial distribution has " +
                        std::to_string(mu0.size()) + " states; game expects " +
                        std::to_string(game.n_states));
  }

  MeanFieldFlow flow(game.horizon, game.n_states);
  std::copy(mu0.begin(), mu0.end(), flow.mutable_slice(0).begin());

  std::vector<double> trans(static_cast<std::size_t>(game.n_states));
  for (int t = 0; t < game.horizon; ++t) {
    const std::span<const double> cur = flow.slice(t);
    const std::span<double> next = flow.mutable_slice(t + 1);
    for (int x = 0; x < game.n_states; ++x) {
      const std::span<const double> pol = policy.row(t, x);
      for (int u = 0; u < game.n_actions; ++u) {
        EvalTransitionChecked(game, t, x, u, cur, trans);
        const double w = cur[static_cast<std::size_t>(x)] *
                         pol[static_cast<std::size_t>(u)];
        // Elementwise accumulate; no reduction, so SIMD and scalar agree
        // bitwise.
        kernels::Active().axpy(w, trans.data(), next.data(), trans.size());
      }
    }
    // Repair accumulated rounding drift; anything beyond the tolerance means
    // a broken model and is rejected inside EvalTransitionChecked above.
    const double sum = SeqSum(next);
    if (std::fabs(sum - 1.0) > kProbDriftTol) {
      std::ostringstream msg;
      msg << "game '" << game.name << "': propagated distribution at t="
          << (t + 1) << " sums to " << sum << " despite per-row validation";
      throw ModelError(msg.str(), t + 1, -1, -1);
    }
    if (sum != 1.0) {
      const double inv = 1.0 / sum;
      for (double& v : next) v *= inv;
    }
  }
  return flow;
}

FlowSet PropagateFlowSet(const GameSpec& game, const Policy& policy,
                         const InitialSet& initials) {
  if (initials.size() == 0) {
    throw ContractError("PropagateFlowSet: empty initial set");
  }
  FlowSet out;
  out.flows.reserve(static_cast<std::size_t>(initials.size()));
  // Flows are independent given the policy; computed in index order.
  for (int k = 0; k < initials.size(); ++k) {
    out.flows.push_back(PropagateFlow(game, policy, initials.initials[k]));
  }
  return out;
}

double FlowDistance(const MeanFieldFlow& a, const MeanFieldFlow& b) {
  if (a.horizon() != b.horizon() || a.n_states() != b.n_states()) {
    throw ContractError("FlowDistance: shape mismatch");
  }
  const auto& ops = kernels::Active();
  double d = 0.0;
  for (int t = 0; t <= a.horizon(); ++t) {
    const double dt =
        ops.tv_distance(a.slice(t).data(), b.slice(t).data(),
                        static_cast<std::size_t>(a.n_states()));
    if (dt > d) d = dt;
  }
  return d;
}

double FlowSetDistance(const FlowSet& a, const FlowSet& b) {
  if (a.size() != b.size()) {
    throw ContractError("FlowSetDistance: flow sets have different sizes");
  }
  if (a.size() == 0) {
    throw ContractError("FlowSetDistance: empty flow sets");
  }
  double d = 0.0;
  for (int k = 0; k < a.size(); ++k) {
    const double dk = FlowDistance(a.flows[k], b.flows[k]);
    if (dk > d) d = dk;
  }
  return d;
}

double PolicyDistance(const Policy& a, const Policy& b) {
  if (!a.SameShape(b)) {
    throw ContractError("PolicyDistance: shape mismatch");
  }
  const auto& ops = kernels::Active();
  double d = 0.0;
  for (int t = 0; t < a.horizon(); ++t) {
    for (int x = 0; x < a.n_states(); ++x) {
      const double dtx =
          ops.tv_distance(a.row(t, x).data(), b.row(t, x).data(),
                          static_cast<std::size_t>(a.n_actions()));
      if (dtx > d) d = dtx;
    }
  }
  return d;
}

double PolicyL1Distance(const Policy& a, const Policy& b) {
  if (!a.SameShape(b)) {
    throw ContractError("PolicyL1Distance: shape mismatch");
  }
  const auto& ops = kernels::Active();
  double d = 0.0;
  for (int t = 0; t < a.horizon(); ++t) {
    double dt = 0.0;
    for (int x = 0; x < a.n_states(); ++x) {
      // tv_distance is half the L1 distance between the rows.
      dt += 2.0 * ops.tv_distance(a.row(t, x).data(), b.row(t, x).data(),
                                  static_cast<std::size_t>(a.n_actions()));
    }
    if (dt > d) d = dt;
  }
  return d;
}

}  // namespace mfrqe
