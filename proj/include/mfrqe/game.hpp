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

#ifndef MFRQE_GAME_H_
#define MFRQE_GAME_H_

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mfrqe/common.hpp"
#include "mfrqe/prob.hpp"

namespace mfrqe {

// Writes the transition distribution f_t(. | x, u, mu) over next states into
// `out` (length n_states).
using TransitionFn = std::function<void(
    int t, int x, int u, std::span<const double> mu, std::span<double> out)>;

// Returns the running reward r_t(x, u, mu).
using RewardFn =
    std::function<double(int t, int x, int u, std::span<const double> mu)>;

// A finite-horizon game with population-dependent dynamics and rewards for a
// representative agent: states {0..n_states-1}, actions {0..n_actions-1},
// decision steps t in {0..horizon-1}.  Evaluator outputs are validated at
// every use: transition rows must sum to one within kProbDriftTol (drift is
// repaired, anything worse is a ModelError) and rewards must satisfy
// |r| <= r_max.
struct GameSpec {
  std::string name;
  int n_states = 0;
  int n_actions = 0;
  int horizon = 0;
  double r_max = 0.0;
  TransitionFn transition;
  RewardFn reward;
  std::vector<std::string> state_labels;   // optional; empty or n_states
  std::vector<std::string> action_labels;  // optional; empty or n_actions

  // Throws ContractError on inconsistent dimensions or missing evaluators.
  void Validate() const;
};

// A time-dependent Markov policy: one action distribution per (t, x).
class Policy {
 public:
  Policy() = default;
  // Zero-filled; rows must be assigned before use (the zero policy is the
  // natural accumulator for policy averaging).
  Policy(int horizon, int n_states, int n_actions);

  static Policy Uniform(int horizon, int n_states, int n_actions);

  int horizon() const { return horizon_; }
  int n_states() const { return n_states_; }
  int n_actions() const { return n_actions_; }

  std::span<const double> row(int t, int x) const;
  std::span<double> mutable_row(int t, int x);
  // Validates the row as a distribution before storing it.
  void SetRow(int t, int x, std::span<const double> row);

  std::span<const double> data() const { return {data_.data(), data_.size()}; }
  std::span<double> mutable_data() { return {data_.data(), data_.size()}; }

  // Checks that every row is a probability vector within `sum_tol`.
  void ValidateRows(double sum_tol = kProbConstructTol) const;

  bool SameShape(const Policy& other) const {
    return horizon_ == other.horizon_ && n_states_ == other.n_states_ &&
           n_actions_ == other.n_actions_;
  }

 private:
  std::size_t index(int t, int x) const {
    return (static_cast<std::size_t>(t) * n_states_ + x) * n_actions_;
  }

  int horizon_ = 0;
  int n_states_ = 0;
  int n_actions_ = 0;
  std::vector<double> data_;
};

// The finite set of candidate initial distributions together with the prior
// over them.
struct InitialSet {
  std::vector<ProbVector> initials;
  ProbVector weights;

  InitialSet() = default;
  InitialSet(std::vector<ProbVector> initials_in, ProbVector weights_in);

  int size() const { return static_cast<int>(initials.size()); }
  int n_states() const { return initials.empty() ? 0 : initials[0].size(); }
};

// A deterministic population flow: one state distribution per t in
// {0..horizon}; slice(0) is the initial distribution.
class MeanFieldFlow {
 public:
  MeanFieldFlow() = default;
  MeanFieldFlow(int horizon, int n_states);

  int horizon() const { return horizon_; }
  int n_states() const { return n_states_; }

  std::span<const double> slice(int t) const;
  std::span<double> mutable_slice(int t);

  std::span<const double> data() const { return {data_.data(), data_.size()}; }

 private:
  int horizon_ = 0;
  int n_states_ = 0;
  std::vector<double> data_;
};

// One flow per candidate initial distribution, index-aligned with the
// InitialSet that produced it.
struct FlowSet {
  std::vector<MeanFieldFlow> flows;

  int size() const { return static_cast<int>(flows.size()); }
};

// Evaluates the transition distribution with validation: rows are checked
// for finite nonnegative entries, drift up to kProbDriftTol is renormalized
// away, and larger deviations raise ModelError carrying (t, x, u).
void EvalTransitionChecked(const GameSpec& game, int t, int x, int u,
                           std::span<const double> mu, std::span<double> out);

// Evaluates the reward with validation: non-finite values or |r| > r_max
// (plus drift slack) raise ModelError carrying (t, x, u).
double EvalRewardChecked(const GameSpec& game, int t, int x, int u,
                         std::span<const double> mu);

// Propagates mu forward under the policy:
//   mu_{t+1}(x') = sum_x sum_u f_t(x'|x,u,mu_t) pi_t(u|x) mu_t(x),
// accumulated in ascending (x, u, x') order.
MeanFieldFlow PropagateFlow(const GameSpec& game, const Policy& policy,
                            const ProbVector& mu0);

// Propagates every initial distribution; result is index-aligned with
// `initials`.
FlowSet PropagateFlowSet(const GameSpec& game, const Policy& policy,
                         const InitialSet& initials);

// max over t of the total-variation distance between slices.
double FlowDistance(const MeanFieldFlow& a, const MeanFieldFlow& b);

// max over (k, t); the flow-set metric d_S.
double FlowSetDistance(const FlowSet& a, const FlowSet& b);

// max over (t, x) of the total-variation distance between rows; the policy
// metric d_Pi.
double PolicyDistance(const Policy& a, const Policy& b);

// max over t of the entrywise L1 difference between the per-timestep
// decision matrices, i.e. max_t sum_{x,u} |a - b|. This is the norm used
// when reporting exploitability gaps.
double PolicyL1Distance(const Policy& a, const Policy& b);

}  // namespace mfrqe

#endif  // MFRQE_GAME_H_
