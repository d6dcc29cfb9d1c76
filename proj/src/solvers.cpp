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

#include "mfrqe/solvers.hpp"

#include <chrono>
#include <utility>

namespace mfrqe {
namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point from, Clock::time_point to) {
  return std::chrono::duration<double>(to - from).count();
}

int ResolveIterations(const EnvPreset& preset, const SolveOptions& opts) {
  const int iters =
      opts.iterations > 0 ? opts.iterations : preset.fpi_iterations;
  if (iters <= 0) {
    throw ContractError("solver: iteration budget must be positive");
  }
  if (opts.iterations < 0) {
    throw ContractError("solver: iterations must be nonnegative");
  }
  return iters;
}

double ResolveBeta(const EnvPreset& preset, const SolveOptions& opts) {
  const double beta = opts.beta == 0.0 ? preset.fictitious_beta : opts.beta;
  if (!(beta > 0.0) || !(beta < 1.0)) {
    throw ContractError("solver: beta must lie strictly in (0, 1)");
  }
  return beta;
}

Policy BestResponseTo(const Policy& policy, const EnvPreset& preset,
                      const BestResponseOptions& opts,
                      QAggregate aggregate = QAggregate::kRiskLogSumExp) {
  const FlowSet flows =
      PropagateFlowSet(preset.game, policy, preset.initials);
  return BestResponsePolicy(preset.game, flows,
                            preset.initials.weights.span(), preset.risk,
                            preset.regularizer, opts, aggregate);
}

// The shared fixed-point skeleton; `aggregate` selects the row objective.
SolveReport FpiLoop(const EnvPreset& preset, const SolveOptions& opts,
                    const Policy* init, QAggregate aggregate) {
  preset.Validate();
  const int iterations = ResolveIterations(preset, opts);
  const auto start_time = Clock::now();

  Policy policy = init != nullptr
                      ? *init
                      : Policy::Uniform(preset.game.horizon,
                                        preset.game.n_states,
                                        preset.game.n_actions);
  if (init != nullptr) {
    if (policy.horizon() != preset.game.horizon ||
        policy.n_states() != preset.game.n_states ||
        policy.n_actions() != preset.game.n_actions) {
      throw ContractError("solver: init policy shape does not match game");
    }
    policy.ValidateRows();
  }

  SolveReport report;
  report.seed = opts.seed;
  report.preset_fingerprint = preset.Fingerprint();

  for (int j = 0; j < iterations; ++j) {
    Policy next = BestResponseTo(policy, preset, opts.br, aggregate);
    // `next` is exactly the best response against the flows `policy`
    // induces, so the gap to it *is* the exploitability of the current
    // iterate; only the norms differ between the two traces.
    report.exploitability_trace.push_back(PolicyL1Distance(policy, next));
    const double delta = PolicyDistance(policy, next);
    report.policy_delta_trace.push_back(delta);
    policy = std::move(next);
    ++report.iterations_run;
    if (delta < opts.early_stop) break;
  }

  report.final_flows = PropagateFlowSet(preset.game, policy, preset.initials);
  report.final_policy = std::move(policy);
  report.wall_time = Seconds(start_time, Clock::now());
  return report;
}

}  // namespace

double Exploitability(const Policy& policy, const EnvPreset& preset,
                      const BestResponseOptions& opts) {
  const Policy br = BestResponseTo(policy, preset, opts);
  return PolicyL1Distance(policy, br);
}

SolveReport RqFpi(const EnvPreset& preset, const SolveOptions& opts,
                  const Policy* init) {
  return FpiLoop(preset, opts, init, QAggregate::kRiskLogSumExp);
}

SolveReport RqFictitiousPlay(const EnvPreset& preset,
                             const SolveOptions& opts) {
  preset.Validate();
  const int iterations = ResolveIterations(preset, opts);
  const double beta = ResolveBeta(preset, opts);
  const auto start_time = Clock::now();

  const int T = preset.game.horizon;
  const int X = preset.game.n_states;
  const int U = preset.game.n_actions;

  Policy pi = Policy::Uniform(T, X, U);
  Policy bar(T, X, U);  // zero accumulator; normalized on first update
  Policy prev_bar = pi;  // the initialization counts as iterate -1

  SolveReport report;
  report.seed = opts.seed;
  report.preset_fingerprint = preset.Fingerprint();

  for (int j = 0; j < iterations; ++j) {
    // bar <- normalize(beta * bar + (1 - beta) * pi), row by row.
    for (int t = 0; t < T; ++t) {
      for (int x = 0; x < X; ++x) {
        std::span<double> row = bar.mutable_row(t, x);
        std::span<const double> pi_row = pi.row(t, x);
        double sum = 0.0;
        for (int u = 0; u < U; ++u) {
          row[static_cast<std::size_t>(u)] =
              beta * row[static_cast<std::size_t>(u)] +
              (1.0 - beta) * pi_row[static_cast<std::size_t>(u)];
          sum += row[static_cast<std::size_t>(u)];
        }
        for (int u = 0; u < U; ++u) {
          row[static_cast<std::size_t>(u)] /= sum;
        }
      }
    }

    const FlowSet flows = PropagateFlowSet(preset.game, bar, preset.initials);
    Policy next = BestResponsePolicy(
        preset.game, flows, preset.initials.weights.span(), preset.risk,
        preset.regularizer, opts.br);
    // `next` is the best response against bar's own flows, so this distance
    // is the exploitability of the current averaged policy.
    report.exploitability_trace.push_back(PolicyL1Distance(bar, next));
    const double delta = PolicyDistance(bar, prev_bar);
    report.policy_delta_trace.push_back(delta);
    prev_bar = bar;
    pi = std::move(next);
    ++report.iterations_run;
    if (j > 0 && delta < opts.early_stop) break;
  }

  report.final_flows = PropagateFlowSet(preset.game, bar, preset.initials);
  report.final_policy = std::move(bar);
  report.wall_time = Seconds(start_time, Clock::now());
  return report;
}

EnvPreset SingletonPreset(const EnvPreset& preset, int which_mu0) {
  if (which_mu0 < 0 || which_mu0 >= preset.initials.size()) {
    throw ContractError("solver: initial-distribution index " +
                        std::to_string(which_mu0) + " out of range [0, " +
                        std::to_string(preset.initials.size()) + ")");
  }
  EnvPreset reduced = preset;
  reduced.initials = InitialSet(
      {preset.initials.initials[static_cast<std::size_t>(which_mu0)]},
      ProbVector({1.0}));
  reduced.provenance["reduced_to_initial"] = which_mu0;
  reduced.provenance["initials"] = nlohmann::json::array(
      {reduced.initials.initials[0].values()});
  reduced.provenance["weights"] = reduced.initials.weights.values();
  return reduced;
}

Policy SolveSingleMfe(const EnvPreset& preset, int which_mu0,
                      const SolveOptions& opts) {
  return SolveSingleMfeReport(preset, which_mu0, opts).final_policy;
}

Policy SolvePiAvg(const EnvPreset& preset, const SolveOptions& opts) {
  return SolvePiAvgReport(preset, opts).final_policy;
}

SolveReport SolveSingleMfeReport(const EnvPreset& preset, int which_mu0,
                                 const SolveOptions& opts) {
  const EnvPreset reduced = SingletonPreset(preset, which_mu0);
  return RqFpi(reduced, opts);
}

SolveReport SolvePiAvgReport(const EnvPreset& preset,
                             const SolveOptions& opts) {
  return FpiLoop(preset, opts, nullptr, QAggregate::kWeightedAverage);
}

}  // namespace mfrqe
