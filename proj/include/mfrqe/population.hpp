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

#ifndef MFRQE_POPULATION_H_
#define MFRQE_POPULATION_H_

#include <cstdint>
#include <span>
#include <vector>

#include "mfrqe/envs.hpp"
#include "mfrqe/game.hpp"

namespace mfrqe {

// One finite-population rollout: N agents sharing a policy, coupled only
// through the per-step empirical state distribution.
struct PopulationTrajectory {
  int n_agents = 0;
  int horizon = 0;
  int n_states = 0;
  // Index of the initial distribution this episode used (sampled from the
  // preset prior when the caller did not fix one).
  int initial_index = -1;
  std::uint64_t seed = 0;

  std::vector<std::int32_t> states;     // (horizon+1) x n_agents, time-major
  std::vector<std::int32_t> actions;    // horizon x n_agents
  std::vector<double> rewards;          // horizon x n_agents
  std::vector<double> empirical_flows;  // (horizon+1) x n_states

  std::span<const std::int32_t> states_at(int t) const;
  std::span<const std::int32_t> actions_at(int t) const;
  std::span<const double> rewards_at(int t) const;
  std::span<const double> empirical_at(int t) const;

  // Mean over agents of the per-agent cumulative reward (each agent's return
  // is its recorded rewards summed in time order).
  double MeanReturn() const;
};

// Fraction of agents at each state; entries are exact multiples of 1/N.
ProbVector EmpiricalDistribution(std::span<const std::int32_t> agent_states,
                                 int n_states);

// Rolls out `n_agents` agents for the preset's horizon.  Initial states are
// sampled from the `which_mu0`-th initial distribution (or from one drawn
// from the preset prior when which_mu0 < 0); actions come from the policy
// and next states from the transition model evaluated at the *empirical*
// distribution of the current step.  Every random draw is a pure function of
// (seed, agent, t), so trajectories are bitwise reproducible regardless of
// batching order, kernel selection, or thread count.
PopulationTrajectory SimulatePopulation(const EnvPreset& preset,
                                        const Policy& policy, int n_agents,
                                        int which_mu0, std::uint64_t seed);

struct GapOptions {
  int n_agents = 64;
  int n_episodes = 32;
  std::uint64_t seed = 0;
  int threads = 1;
};

// Mean-field approximation error: how far finite-population empirical flows
// stray from the deterministic limit flows under the same policy.
struct GapReport {
  int n_agents = 0;
  int n_episodes = 0;
  std::uint64_t seed = 0;
  int n_initials = 0;
  int horizon = 0;
  // Mean over episodes of the total-variation distance between the empirical
  // and limit flows; n_initials x (horizon+1), initial-major.
  std::vector<double> mean_by_initial_t;
  // The same means aggregated over initials by the preset prior.
  std::vector<double> per_t_mean;  // horizon+1 entries
  // Max over (initial, t) of the per-cell means.
  double max_gap = 0.0;

  double at(int k, int t) const {
    return mean_by_initial_t[static_cast<std::size_t>(k) * (horizon + 1) + t];
  }
};

// Runs opts.n_episodes population rollouts per initial distribution and
// compares each step's empirical distribution with the analytic flow.
GapReport MfGap(const EnvPreset& preset, const Policy& policy,
                const GapOptions& opts = {});

struct EvalOptions {
  int n_episodes = 10000;
  int n_seeds = 5;
  // When true (default), a single representative agent is rolled out against
  // the analytic limit flows; when false, full-population rollouts with
  // n_agents agents are used and each episode contributes its mean over
  // agents.
  bool use_limit_flow = true;
  int n_agents = 100;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct ReturnStats {
  double mean = 0.0;
  double std_error = 0.0;  // sample standard deviation / sqrt(n_samples)
  std::int64_t n_samples = 0;
};

// Cumulative-reward statistics for `policy`, pooled across
// n_seeds x n_episodes episodes; the initial distribution is drawn from the
// preset prior each episode.
ReturnStats EvaluateReturns(const EnvPreset& preset, const Policy& policy,
                            const EvalOptions& opts = {});

// Fixed-order pairwise summation: deterministic across runs and thread
// counts, with O(log n) rounding-error growth.
double PairwiseSum(std::span<const double> v);

}  // namespace mfrqe

#endif  // MFRQE_POPULATION_H_
