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

#ifndef MFRQE_SOLVERS_H_
#define MFRQE_SOLVERS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "mfrqe/envs.hpp"
#include "mfrqe/game.hpp"
#include "mfrqe/risk.hpp"

namespace mfrqe {

// Knobs shared by the outer solvers.
struct SolveOptions {
  // Outer iteration budget; 0 falls back to the preset's fpi_iterations.
  int iterations = 0;
  // Averaging rate for fictitious play; 0 falls back to the preset's
  // fictitious_beta.  Must otherwise lie strictly in (0, 1).
  double beta = 0.0;
  // Stop once successive iterates are closer than this in the policy metric.
  double early_stop = 1e-10;
  // Inner row-solver settings.
  BestResponseOptions br;
  // Recorded in the report; solvers are deterministic, the seed only tags
  // downstream sampling runs derived from the report.
  std::uint64_t seed = 0;
};

// Outcome of one solver run.
struct SolveReport {
  Policy final_policy;
  FlowSet final_flows;  // flows induced by final_policy
  // Entry j is the exploitability of the policy entering iteration j (its
  // PolicyL1Distance to the best response against that policy's own flows).
  std::vector<double> exploitability_trace;
  // Entry j is the policy distance (d_Pi) between successive iterates at
  // iteration j (0 for the first iteration of averaging solvers).
  std::vector<double> policy_delta_trace;
  int iterations_run = 0;
  double wall_time = 0.0;  // seconds
  std::uint64_t seed = 0;
  std::string preset_fingerprint;
};

// How far `policy` is from being optimal against the population behaviour it
// itself induces: propagates the flow set under `policy`, computes the best
// response against those flows, and returns the PolicyL1Distance (max over
// t of the entrywise L1 gap) between the two.  Zero exactly at a consistent
// pair.
double Exploitability(const Policy& policy, const EnvPreset& preset,
                      const BestResponseOptions& opts = {});

// Fixed-point iteration: starting from `init` (uniform when null), repeats
//   flows <- propagate(policy); policy <- best response(flows)
// recording the exploitability of each iterate, and stops early when an
// iteration moves the policy by less than opts.early_stop.
SolveReport RqFpi(const EnvPreset& preset, const SolveOptions& opts = {},
                  const Policy* init = nullptr);

// Fictitious play: maintains a running average pi_bar of the best responses,
//   pi_bar <- normalize(beta * pi_bar + (1 - beta) * pi)
//   pi     <- best response(flows(pi_bar))
// starting from uniform pi and a zero accumulator, and returns the averaged
// policy.  The exploitability trace tracks pi_bar.
SolveReport RqFictitiousPlay(const EnvPreset& preset,
                             const SolveOptions& opts = {});

// The preset restricted to its k-th initial distribution (unit weight); the
// baseline environment for per-initial equilibria.
EnvPreset SingletonPreset(const EnvPreset& preset, int which_mu0);

// Baseline (i): the equilibrium policy computed as if the k-th initial
// distribution were certain — fixed-point iteration on the singleton preset.
Policy SolveSingleMfe(const EnvPreset& preset, int which_mu0,
                      const SolveOptions& opts = {});

// Baseline (ii): fixed-point iteration where the row objective uses the
// weighted-average action values over all flows (a linear objective) instead
// of the risk-adjusted aggregate; the risk-neutral counterpart policy.
Policy SolvePiAvg(const EnvPreset& preset, const SolveOptions& opts = {});

// Report-returning variants of the baselines, for callers that persist full
// traces.  Both reports describe the baseline's own fixed-point iteration:
// the single-MFE report is the plain solve of the singleton preset, and the
// averaged report's trace measures the gap against the *linear-objective*
// best response, not the risk-adjusted exploitability.
SolveReport SolveSingleMfeReport(const EnvPreset& preset, int which_mu0,
                                 const SolveOptions& opts = {});
SolveReport SolvePiAvgReport(const EnvPreset& preset,
                             const SolveOptions& opts = {});

}  // namespace mfrqe

#endif  // MFRQE_SOLVERS_H_
