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

#include "mfrqe/population.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>

#include "mfrqe/kernels.hpp"
#include "mfrqe/rng.hpp"

namespace mfrqe {
namespace {

// Inclusive cumulative weights of a distribution row.
void InclusiveCdf(std::span<const double> p, std::vector<double>& cdf) {
  cdf.resize(p.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    acc += p[i];
    cdf[i] = acc;
  }
}

// Runs fn(0..n-1) on up to `threads` workers.  Work items must be
// independent; the counter-based draw scheme keeps results identical to the
// sequential order.
void ParallelFor(int n, int threads, const std::function<void(int)>& fn) {
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int w = 0; w < threads; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

void CountsToDistribution(std::span<const std::int32_t> agent_states,
                          int n_states, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  std::vector<std::int64_t> counts(static_cast<std::size_t>(n_states), 0);
  for (std::int32_t s : agent_states) {
    if (s < 0 || s >= n_states) {
      throw ContractError("population: agent state " + std::to_string(s) +
                          " outside [0, " + std::to_string(n_states) + ")");
    }
    ++counts[static_cast<std::size_t>(s)];
  }
  const double n = static_cast<double>(agent_states.size());
  for (int x = 0; x < n_states; ++x) {
    out[static_cast<std::size_t>(x)] =
        static_cast<double>(counts[static_cast<std::size_t>(x)]) / n;
  }
}

}  // namespace

std::span<const std::int32_t> PopulationTrajectory::states_at(int t) const {
  return {states.data() + static_cast<std::size_t>(t) * n_agents,
          static_cast<std::size_t>(n_agents)};
}

std::span<const std::int32_t> PopulationTrajectory::actions_at(int t) const {
  return {actions.data() + static_cast<std::size_t>(t) * n_agents,
          static_cast<std::size_t>(n_agents)};
}

std::span<const double> PopulationTrajectory::rewards_at(int t) const {
  return {rewards.data() + static_cast<std::size_t>(t) * n_agents,
          static_cast<std::size_t>(n_agents)};
}

std::span<const double> PopulationTrajectory::empirical_at(int t) const {
  return {empirical_flows.data() + static_cast<std::size_t>(t) * n_states,
          static_cast<std::size_t>(n_states)};
}

double PopulationTrajectory::MeanReturn() const {
  std::vector<double> returns(static_cast<std::size_t>(n_agents), 0.0);
  for (int t = 0; t < horizon; ++t) {
    std::span<const double> r = rewards_at(t);
    for (int i = 0; i < n_agents; ++i) {
      returns[static_cast<std::size_t>(i)] += r[static_cast<std::size_t>(i)];
    }
  }
  return PairwiseSum(returns) / static_cast<double>(n_agents);
}

ProbVector EmpiricalDistribution(std::span<const std::int32_t> agent_states,
                                 int n_states) {
  if (agent_states.empty()) {
    throw ContractError("population: empirical distribution of zero agents");
  }
  if (n_states <= 0) {
    throw ContractError("population: n_states must be positive");
  }
  std::vector<double> p(static_cast<std::size_t>(n_states), 0.0);
  CountsToDistribution(agent_states, n_states, p);
  return ProbVector(std::move(p));
}

PopulationTrajectory SimulatePopulation(const EnvPreset& preset,
                                        const Policy& policy, int n_agents,
                                        int which_mu0, std::uint64_t seed) {
  const GameSpec& game = preset.game;
  if (n_agents < 1) {
    throw ContractError("population: n_agents must be >= 1");
  }
  if (policy.horizon() != game.horizon ||
      policy.n_states() != game.n_states ||
      policy.n_actions() != game.n_actions) {
    throw ContractError("population: policy shape does not match game");
  }
  if (which_mu0 >= preset.initials.size()) {
    throw ContractError("population: initial-distribution index " +
                        std::to_string(which_mu0) + " out of range [0, " +
                        std::to_string(preset.initials.size()) + ")");
  }

  const int T = game.horizon;
  const int X = game.n_states;
  const int U = game.n_actions;
  const int N = n_agents;
  const auto& ops = kernels::Active();
  const rng::Stream episode(seed);

  PopulationTrajectory traj;
  traj.n_agents = N;
  traj.horizon = T;
  traj.n_states = X;
  traj.seed = seed;
  traj.states.resize(static_cast<std::size_t>(T + 1) * N);
  traj.actions.resize(static_cast<std::size_t>(T) * N);
  traj.rewards.resize(static_cast<std::size_t>(T) * N);
  traj.empirical_flows.resize(static_cast<std::size_t>(T + 1) * X);

  std::vector<double> cdf;

  // Sub-stream 0: which initial distribution the episode follows.
  int k = which_mu0;
  if (k < 0) {
    InclusiveCdf(preset.initials.weights.span(), cdf);
    k = kernels::CategoricalIndex(cdf.data(), cdf.size(),
                                  episode.At(0).Uniform(0));
  }
  traj.initial_index = k;

  std::vector<double> unif(static_cast<std::size_t>(N));
  std::vector<std::int32_t> drawn(static_cast<std::size_t>(N));

  // Sub-stream 1: one initial-state draw per agent.
  const rng::Stream init_stream = episode.At(1);
  for (int i = 0; i < N; ++i) {
    unif[static_cast<std::size_t>(i)] =
        init_stream.At(static_cast<std::uint64_t>(i)).Uniform(0);
  }
  InclusiveCdf(preset.initials.initials[static_cast<std::size_t>(k)].span(),
               cdf);
  ops.categorical_batch(cdf.data(), cdf.size(), unif.data(), drawn.data(),
                        static_cast<std::size_t>(N));
  std::copy(drawn.begin(), drawn.end(), traj.states.begin());
  CountsToDistribution(traj.states_at(0), X,
                       {traj.empirical_flows.data(),
                        static_cast<std::size_t>(X)});

  // Sub-stream 2: two draws per (agent, t) — action then transition.
  const rng::Stream step_stream = episode.At(2);
  std::vector<std::vector<int>> by_state(static_cast<std::size_t>(X));
  std::vector<std::vector<int>> by_pair(static_cast<std::size_t>(X) * U);
  std::vector<double> trans_row(static_cast<std::size_t>(X));

  for (int t = 0; t < T; ++t) {
    const std::span<const double> emp = traj.empirical_at(t);
    const std::int32_t* x_now =
        traj.states.data() + static_cast<std::size_t>(t) * N;
    std::int32_t* x_next =
        traj.states.data() + static_cast<std::size_t>(t + 1) * N;
    std::int32_t* act = traj.actions.data() + static_cast<std::size_t>(t) * N;
    double* rew = traj.rewards.data() + static_cast<std::size_t>(t) * N;

    // Actions: agents in the same state share a policy row, so their draws
    // batch into one categorical call.
    for (auto& b : by_state) b.clear();
    for (int i = 0; i < N; ++i) {
      by_state[static_cast<std::size_t>(x_now[i])].push_back(i);
    }
    for (int x = 0; x < X; ++x) {
      const std::vector<int>& group = by_state[static_cast<std::size_t>(x)];
      if (group.empty()) continue;
      InclusiveCdf(policy.row(t, x), cdf);
      for (std::size_t j = 0; j < group.size(); ++j) {
        unif[j] = step_stream.At(static_cast<std::uint64_t>(group[j]))
                      .At(static_cast<std::uint64_t>(t))
                      .Uniform(0);
      }
      ops.categorical_batch(cdf.data(), cdf.size(), unif.data(), drawn.data(),
                            group.size());
      for (std::size_t j = 0; j < group.size(); ++j) {
        act[group[j]] = drawn[j];
      }
    }

    // Rewards and next states: both depend on (x, u) and the empirical
    // distribution, so batch by the pair.
    for (auto& b : by_pair) b.clear();
    for (int i = 0; i < N; ++i) {
      by_pair[static_cast<std::size_t>(x_now[i]) * U + act[i]].push_back(i);
    }
    for (int x = 0; x < X; ++x) {
      for (int u = 0; u < U; ++u) {
        const std::vector<int>& group =
            by_pair[static_cast<std::size_t>(x) * U + u];
        if (group.empty()) continue;
        const double r = EvalRewardChecked(game, t, x, u, emp);
        for (int i : group) rew[i] = r;
        EvalTransitionChecked(game, t, x, u, emp,
                              {trans_row.data(), trans_row.size()});
        InclusiveCdf({trans_row.data(), trans_row.size()}, cdf);
        for (std::size_t j = 0; j < group.size(); ++j) {
          unif[j] = step_stream.At(static_cast<std::uint64_t>(group[j]))
                        .At(static_cast<std::uint64_t>(t))
                        .Uniform(1);
        }
        ops.categorical_batch(cdf.data(), cdf.size(), unif.data(),
                              drawn.data(), group.size());
        for (std::size_t j = 0; j < group.size(); ++j) {
          x_next[group[j]] = drawn[j];
        }
      }
    }

    CountsToDistribution(traj.states_at(t + 1), X,
                         {traj.empirical_flows.data() +
                              static_cast<std::size_t>(t + 1) * X,
                          static_cast<std::size_t>(X)});
  }
  return traj;
}

GapReport MfGap(const EnvPreset& preset, const Policy& policy,
                const GapOptions& opts) {
  if (opts.n_episodes < 1) {
    throw ContractError("population: n_episodes must be >= 1");
  }
  const FlowSet limit = PropagateFlowSet(preset.game, policy, preset.initials);
  const int K = preset.initials.size();
  const int T = preset.game.horizon;
  const auto& ops = kernels::Active();
  const rng::Stream master(opts.seed);

  GapReport report;
  report.n_agents = opts.n_agents;
  report.n_episodes = opts.n_episodes;
  report.seed = opts.seed;
  report.n_initials = K;
  report.horizon = T;
  report.mean_by_initial_t.assign(
      static_cast<std::size_t>(K) * (T + 1), 0.0);
  report.per_t_mean.assign(static_cast<std::size_t>(T + 1), 0.0);

  for (int k = 0; k < K; ++k) {
    // Episode-major TV table so each time step aggregates in a fixed order.
    std::vector<double> tv(static_cast<std::size_t>(T + 1) * opts.n_episodes);
    const rng::Stream initial_stream = master.At(static_cast<std::uint64_t>(k));
    ParallelFor(opts.n_episodes, opts.threads, [&](int e) {
      const PopulationTrajectory traj = SimulatePopulation(
          preset, policy, opts.n_agents, k,
          initial_stream.At(static_cast<std::uint64_t>(e)).key());
      for (int t = 0; t <= T; ++t) {
        tv[static_cast<std::size_t>(t) * opts.n_episodes + e] =
            ops.tv_distance(traj.empirical_at(t).data(),
                            limit.flows[static_cast<std::size_t>(k)]
                                .slice(t)
                                .data(),
                            static_cast<std::size_t>(preset.game.n_states));
      }
    });
    for (int t = 0; t <= T; ++t) {
      const double mean =
          PairwiseSum({tv.data() + static_cast<std::size_t>(t) *
                                       opts.n_episodes,
                       static_cast<std::size_t>(opts.n_episodes)}) /
          static_cast<double>(opts.n_episodes);
      report.mean_by_initial_t[static_cast<std::size_t>(k) * (T + 1) + t] =
          mean;
      report.per_t_mean[static_cast<std::size_t>(t)] +=
          preset.initials.weights[k] * mean;
      report.max_gap = std::max(report.max_gap, mean);
    }
  }
  return report;
}

ReturnStats EvaluateReturns(const EnvPreset& preset, const Policy& policy,
                            const EvalOptions& opts) {
  if (opts.n_episodes < 1 || opts.n_seeds < 1) {
    throw ContractError("population: n_episodes and n_seeds must be >= 1");
  }
  const GameSpec& game = preset.game;
  const int T = game.horizon;
  const int X = game.n_states;
  const rng::Stream master(opts.seed);

  const std::int64_t total =
      static_cast<std::int64_t>(opts.n_seeds) * opts.n_episodes;
  std::vector<double> returns(static_cast<std::size_t>(total), 0.0);

  if (opts.use_limit_flow) {
    const FlowSet limit = PropagateFlowSet(game, policy, preset.initials);
    std::vector<double> weight_cdf;
    InclusiveCdf(preset.initials.weights.span(), weight_cdf);
    std::vector<std::vector<double>> init_cdf(
        static_cast<std::size_t>(preset.initials.size()));
    for (int k = 0; k < preset.initials.size(); ++k) {
      InclusiveCdf(preset.initials.initials[static_cast<std::size_t>(k)].span(),
                   init_cdf[static_cast<std::size_t>(k)]);
    }

    ParallelFor(
        static_cast<int>(total), opts.threads, [&](int idx) {
          const int s = idx / opts.n_episodes;
          const int e = idx % opts.n_episodes;
          // One representative agent (agent id 0) rolled against the
          // analytic flows; the draw layout matches SimulatePopulation.
          const rng::Stream episode =
              master.At(static_cast<std::uint64_t>(s))
                  .At(static_cast<std::uint64_t>(e));
          const int k = kernels::CategoricalIndex(
              weight_cdf.data(), weight_cdf.size(),
              episode.At(0).Uniform(0));
          const MeanFieldFlow& flow = limit.flows[static_cast<std::size_t>(k)];
          const std::vector<double>& cdf0 =
              init_cdf[static_cast<std::size_t>(k)];
          int x = kernels::CategoricalIndex(
              cdf0.data(), cdf0.size(), episode.At(1).At(0).Uniform(0));
          const rng::Stream agent = episode.At(2).At(0);
          std::vector<double> row(static_cast<std::size_t>(X));
          double ret = 0.0;
          for (int t = 0; t < T; ++t) {
            const rng::Stream step = agent.At(static_cast<std::uint64_t>(t));
            std::span<const double> pi_row = policy.row(t, x);
            std::vector<double> act_cdf(pi_row.size());
            double acc = 0.0;
            for (std::size_t u = 0; u < pi_row.size(); ++u) {
              acc += pi_row[u];
              act_cdf[u] = acc;
            }
            const int u = kernels::CategoricalIndex(
                act_cdf.data(), act_cdf.size(), step.Uniform(0));
            const std::span<const double> mu = flow.slice(t);
            ret += EvalRewardChecked(game, t, x, u, mu);
            EvalTransitionChecked(game, t, x, u, mu,
                                  {row.data(), row.size()});
            double tacc = 0.0;
            for (std::size_t y = 0; y < row.size(); ++y) {
              tacc += row[y];
              row[y] = tacc;
            }
            x = kernels::CategoricalIndex(row.data(), row.size(),
                                          step.Uniform(1));
          }
          returns[static_cast<std::size_t>(idx)] = ret;
        });
  } else {
    ParallelFor(static_cast<int>(total), opts.threads, [&](int idx) {
      const int s = idx / opts.n_episodes;
      const int e = idx % opts.n_episodes;
      const PopulationTrajectory traj = SimulatePopulation(
          preset, policy, opts.n_agents, /*which_mu0=*/-1,
          master.At(static_cast<std::uint64_t>(s))
              .At(static_cast<std::uint64_t>(e))
              .key());
      returns[static_cast<std::size_t>(idx)] = traj.MeanReturn();
    });
  }

  ReturnStats stats;
  stats.n_samples = total;
  stats.mean = PairwiseSum(returns) / static_cast<double>(total);
  if (total > 1) {
    std::vector<double> sq(returns.size());
    for (std::size_t i = 0; i < returns.size(); ++i) {
      const double d = returns[i] - stats.mean;
      sq[i] = d * d;
    }
    const double var =
        PairwiseSum(sq) / static_cast<double>(total - 1);
    stats.std_error = std::sqrt(var / static_cast<double>(total));
  }
  return stats;
}

double PairwiseSum(std::span<const double> v) {
  if (v.size() <= 8) {
    double acc = 0.0;
    for (double x : v) acc += x;
    return acc;
  }
  const std::size_t mid = v.size() / 2;
  return PairwiseSum(v.first(mid)) + PairwiseSum(v.subspan(mid));
}

}  // namespace mfrqe
