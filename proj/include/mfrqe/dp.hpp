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

#ifndef MFRQE_DP_H_
#define MFRQE_DP_H_

#include <span>
#include <vector>

#include "mfrqe/game.hpp"

namespace mfrqe {

// Dense state-action values, one block per population flow:
// values[k][t][x][u] for k < n_flows, t < horizon.  All entries satisfy
// |Q| <= horizon * r_max.
struct QField {
  QField() = default;
  QField(int n_flows, int horizon, int n_states, int n_actions);

  int n_flows = 0;
  int horizon = 0;
  int n_states = 0;
  int n_actions = 0;
  std::vector<double> values;

  double at(int k, int t, int x, int u) const {
    return values[index(k, t, x, u)];
  }
  double& at(int k, int t, int x, int u) { return values[index(k, t, x, u)]; }

  // The action-value row for (k, t, x).
  std::span<const double> slice(int k, int t, int x) const {
    return {values.data() + index(k, t, x, 0),
            static_cast<std::size_t>(n_actions)};
  }
  std::span<double> mutable_slice(int k, int t, int x) {
    return {values.data() + index(k, t, x, 0),
            static_cast<std::size_t>(n_actions)};
  }

 private:
  std::size_t index(int k, int t, int x, int u) const {
    return ((static_cast<std::size_t>(k) * horizon + t) * n_states + x) *
               n_actions +
           u;
  }
};

// Dense state values per flow; t runs over {0..horizon} with the terminal
// slice fixed at zero.  All entries satisfy |V| <= horizon * r_max.
struct VField {
  VField() = default;
  VField(int n_flows, int horizon, int n_states);

  int n_flows = 0;
  int horizon = 0;
  int n_states = 0;
  std::vector<double> values;

  double at(int k, int t, int x) const { return values[index(k, t, x)]; }
  double& at(int k, int t, int x) { return values[index(k, t, x)]; }

  std::span<const double> slice(int k, int t) const {
    return {values.data() + index(k, t, 0),
            static_cast<std::size_t>(n_states)};
  }

 private:
  std::size_t index(int k, int t, int x) const {
    return (static_cast<std::size_t>(k) * (horizon + 1) + t) * n_states + x;
  }
};

struct BackwardResult {
  QField q;
  VField v;
};

// Policy evaluation by backward induction, independently for each flow:
//   Q[k][T-1](x,u) = r_{T-1}(x, u, mu^k_{T-1})
//   Q[k][t](x,u)   = r_t(x, u, mu^k_t)
//                    + sum_{x'} f_t(x'|x,u,mu^k_t) V[k][t+1](x')
//   V[k][t](x)     = sum_u pi_t(u|x) Q[k][t](x,u)
// Inner sums are accumulated in ascending x' (then u) order so results do
// not depend on scheduling.
BackwardResult BackwardQ(const GameSpec& game, const Policy& policy,
                         const FlowSet& flows);

// Collapses a per-flow field to the weighted average sum_k w_k Q[k]; the
// result has n_flows == 1.
QField AveragedQ(const QField& q, std::span<const double> weights);

}  // namespace mfrqe

#endif  // MFRQE_DP_H_
