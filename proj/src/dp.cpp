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

#include "mfrqe/dp.hpp"

#include <sstream>

namespace mfrqe {
namespace {

// Fixed-order inner products keep backward induction bitwise stable across
// kernel selections and thread counts.
double SeqDot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

}  // namespace

QField::QField(int n_flows_in, int horizon_in, int n_states_in,
               int n_actions_in)
    : n_flows(n_flows_in),
      horizon(horizon_in),
      n_states(n_states_in),
      n_actions(n_actions_in) {
  if (n_flows <= 0 || horizon <= 0 || n_states <= 0 || n_actions <= 0) {
    throw ContractError("QField: all dimensions must be positive");
  }
  values.assign(static_cast<std::size_t>(n_flows) * horizon * n_states *
                    n_actions,
                0.0);
}

VField::VField(int n_flows_in, int horizon_in, int n_states_in)
    : n_flows(n_flows_in), horizon(horizon_in), n_states(n_states_in) {
  if (n_flows <= 0 || horizon <= 0 || n_states <= 0) {
    throw ContractError("VField: all dimensions must be positive");
  }
  values.assign(
      static_cast<std::size_t>(n_flows) * (horizon + 1) * n_states, 0.0);
}

BackwardResult BackwardQ(const GameSpec& game, const Policy& policy,
                         const FlowSet& flows) {
  game.Validate();
  if (flows.size() == 0) {
    throw ContractError("BackwardQ: empty flow set");
  }
  if (policy.horizon() != game.horizon ||
      policy.n_states() != game.n_states ||
      policy.n_actions() != game.n_actions) {
    throw ContractError("BackwardQ: policy shape does not match game");
  }
  for (int k = 0; k < flows.size(); ++k) {
    if (flows.flows[k].horizon() != game.horizon ||
        flows.flows[k].n_states() != game.n_states) {
      std::ostringstream msg;
      msg << "BackwardQ: flow " << k << " shape does not match game";
      throw ContractError(msg.str());
    }
  }

  const int K = flows.size();
  const int T = game.horizon;
  const int X = game.n_states;
  const int U = game.n_actions;

  BackwardResult out{QField(K, T, X, U), VField(K, T, X)};
  std::vector<double> trans(static_cast<std::size_t>(X));

  for (int k = 0; k < K; ++k) {
    const MeanFieldFlow& flow = flows.flows[k];
    for (int t = T - 1; t >= 0; --t) {
      const std::span<const double> mu = flow.slice(t);
      const std::span<const double> v_next = out.v.slice(k, t + 1);
      for (int x = 0; x < X; ++x) {
        const std::span<double> q_row = out.q.mutable_slice(k, t, x);
        for (int u = 0; u < U; ++u) {
          double q = EvalRewardChecked(game, t, x, u, mu);
          if (t + 1 < T) {
            EvalTransitionChecked(game, t, x, u, mu, trans);
            q += SeqDot({trans.data(), trans.size()}, v_next);
          } else {
            // Terminal values are zero; skip the transition evaluation.
          }
          q_row[static_cast<std::size_t>(u)] = q;
        }
        out.v.at(k, t, x) = SeqDot(policy.row(t, x), q_row);
      }
    }
  }
  return out;
}

QField AveragedQ(const QField& q, std::span<const double> weights) {
  if (q.n_flows <= 0) {
    throw ContractError("AveragedQ: empty Q field");
  }
  if (weights.size() != static_cast<std::size_t>(q.n_flows)) {
    std::ostringstream msg;
    msg << "AveragedQ: " << weights.size() << " weights for " << q.n_flows
        << " flows";
    throw ContractError(msg.str());
  }
  QField avg(1, q.horizon, q.n_states, q.n_actions);
  const std::size_t block = avg.values.size();
  for (int k = 0; k < q.n_flows; ++k) {
    const double w = weights[static_cast<std::size_t>(k)];
    const double* src = q.values.data() + static_cast<std::size_t>(k) * block;
    for (std::size_t i = 0; i < block; ++i) {
      avg.values[i] += w * src[i];
    }
  }
  return avg;
}

}  // namespace mfrqe
