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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include <json.hpp>

#include "mfrqe/envs.hpp"
#include "mfrqe/solvers.hpp"

namespace {

using mfrqe::ContractError;
using mfrqe::EnvPreset;
using mfrqe::Policy;
using mfrqe::SolveOptions;
using mfrqe::SolveReport;

void CheckReportInvariants(const SolveReport& report,
                           const EnvPreset& preset) {
  CHECK(report.iterations_run > 0);
  CHECK(report.exploitability_trace.size() ==
        static_cast<std::size_t>(report.iterations_run));
  CHECK(report.policy_delta_trace.size() ==
        static_cast<std::size_t>(report.iterations_run));
  for (double e : report.exploitability_trace) {
    CHECK(e >= 0.0);
    CHECK(std::isfinite(e));
  }
  for (double d : report.policy_delta_trace) {
    CHECK(d >= 0.0);
    CHECK(d <= 1.0);
  }
  CHECK(report.wall_time >= 0.0);
  CHECK(report.preset_fingerprint == preset.Fingerprint());
  CHECK_NOTHROW(report.final_policy.ValidateRows());
  CHECK(report.final_flows.size() == preset.initials.size());
}

EnvPreset ZeroRewardPreset() {
  nlohmann::json cfg{
      {"n_states", 2},
      {"n_actions", 3},
      {"horizon", 4},
      {"transitions",
       {{{1.0, 0.0}, {0.5, 0.5}, {0.0, 1.0}},
        {{0.3, 0.7}, {1.0, 0.0}, {0.5, 0.5}}}},
      {"rewards", {{0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}}},
      {"initials", {{1.0, 0.0}}},
      {"weights", {1.0}},
      {"alpha", 2.0},
      {"tau", 0.5},
      {"fpi_iterations", 10},
      {"regularizer", "entropy"},
  };
  return mfrqe::MakeFromConfig(cfg);
}

}  // namespace

TEST_CASE("fixed-point iteration solves the congestion preset") {
  const EnvPreset preset = mfrqe::MakeCongestion();
  const SolveReport report = mfrqe::RqFpi(preset);
  CheckReportInvariants(report, preset);

  CHECK(report.exploitability_trace.back() <= 1e-3);
  // Final fixed-point certificate measured on the returned policy.
  CHECK(mfrqe::Exploitability(report.final_policy, preset) <= 1e-6);
  // Self-consistency: the stored flows are those of the final policy.
  const mfrqe::FlowSet flows = mfrqe::PropagateFlowSet(
      preset.game, report.final_policy, preset.initials);
  CHECK(mfrqe::FlowSetDistance(report.final_flows, flows) == 0.0);
}

TEST_CASE("fictitious play agrees with fixed-point iteration") {
  for (const char* name : {"congestion", "rps"}) {
    CAPTURE(name);
    const EnvPreset preset = mfrqe::MakeBuiltin(name);
    const Policy fpi = mfrqe::RqFpi(preset).final_policy;
    const SolveReport fp = mfrqe::RqFictitiousPlay(preset);
    CheckReportInvariants(fp, preset);
    CHECK(mfrqe::PolicyDistance(fp.final_policy, fpi) <= 1e-3);
    // The averaging loop defines iterate -1 as the uniform start.
    CHECK(fp.policy_delta_trace[0] == 0.0);
  }
}

TEST_CASE("flow-independent games converge immediately") {
  // random_linear's tables ignore the population, so the best response is
  // the same for every flow: iteration 2 must be an exact fixed point.
  const EnvPreset preset = mfrqe::MakeBuiltin("random_linear");
  SolveOptions opts;
  const SolveReport report = mfrqe::RqFpi(preset, opts);
  CHECK(report.iterations_run == 2);
  CHECK(report.policy_delta_trace.back() == 0.0);
}

TEST_CASE("zero rewards make the uniform policy optimal") {
  const EnvPreset preset = ZeroRewardPreset();
  const SolveReport report = mfrqe::RqFpi(preset);
  // With no reward signal the entropy regularizer alone decides: uniform.
  const Policy uniform = Policy::Uniform(4, 2, 3);
  CHECK(mfrqe::PolicyDistance(report.final_policy, uniform) <= 1e-8);
  CHECK(report.iterations_run <= 2);  // uniform start is already the answer
}

TEST_CASE("solver options control the iteration budget") {
  const EnvPreset preset = mfrqe::MakeCongestion();

  SUBCASE("fixed budget with early stopping disabled") {
    SolveOptions opts;
    opts.iterations = 3;
    opts.early_stop = 0.0;
    const SolveReport report = mfrqe::RqFpi(preset, opts);
    CHECK(report.iterations_run == 3);
  }

  SUBCASE("aggressive early stop halts after one iteration") {
    SolveOptions opts;
    opts.early_stop = 1.0;
    const SolveReport report = mfrqe::RqFpi(preset, opts);
    CHECK(report.iterations_run == 1);
  }

  SUBCASE("warm start from the solution converges in one iteration") {
    const Policy solved = mfrqe::RqFpi(preset).final_policy;
    SolveOptions opts;
    const SolveReport warm = mfrqe::RqFpi(preset, opts, &solved);
    CHECK(warm.iterations_run == 1);
    CHECK(warm.policy_delta_trace[0] <= 1e-8);
  }
}

TEST_CASE("fictitious play trace semantics") {
  const EnvPreset preset = mfrqe::MakeCongestion();
  SolveOptions opts;
  opts.iterations = 8;
  opts.early_stop = 0.0;
  const SolveReport report = mfrqe::RqFictitiousPlay(preset, opts);
  CHECK(report.iterations_run == 8);
  // The averaged policy should become less exploitable over the run.
  CHECK(report.exploitability_trace.back() <
        report.exploitability_trace.front());
}

TEST_CASE("singleton reduction isolates one initial distribution") {
  const EnvPreset preset = mfrqe::MakeCongestion();
  const EnvPreset reduced = mfrqe::SingletonPreset(preset, 1);
  CHECK(reduced.initials.size() == 1);
  CHECK(reduced.initials.weights[0] == 1.0);
  CHECK(reduced.initials.initials[0][0] ==
        preset.initials.initials[1][0]);
  CHECK(reduced.Fingerprint() != preset.Fingerprint());
  CHECK_NOTHROW(reduced.Validate());

  CHECK_THROWS_AS(mfrqe::SingletonPreset(preset, 4), ContractError);
  CHECK_THROWS_AS(mfrqe::SingletonPreset(preset, -1), ContractError);

  // The convenience wrapper solves exactly the reduced preset.
  const Policy direct = mfrqe::RqFpi(reduced).final_policy;
  const Policy wrapped = mfrqe::SolveSingleMfe(preset, 1);
  CHECK(mfrqe::PolicyDistance(direct, wrapped) == 0.0);
}

TEST_CASE("baseline policies are well-formed but exploitable") {
  const EnvPreset preset = mfrqe::MakeCongestion();
  const Policy avg = mfrqe::SolvePiAvg(preset);
  CHECK_NOTHROW(avg.ValidateRows());

  const Policy rqe = mfrqe::RqFpi(preset).final_policy;
  // The risk-neutral average is measurably worse than the equilibrium.
  CHECK(mfrqe::Exploitability(avg, preset) >
        mfrqe::Exploitability(rqe, preset));
}

TEST_CASE("invalid solver options are contract errors") {
  const EnvPreset preset = mfrqe::MakeCongestion();

  SolveOptions negative_iters;
  negative_iters.iterations = -2;
  CHECK_THROWS_AS(mfrqe::RqFpi(preset, negative_iters), ContractError);

  SolveOptions bad_beta;
  bad_beta.beta = 1.5;
  CHECK_THROWS_AS(mfrqe::RqFictitiousPlay(preset, bad_beta), ContractError);

  const Policy wrong_shape = Policy::Uniform(5, 4, 2);  // 2 actions, not 3
  SolveOptions opts;
  CHECK_THROWS_AS(mfrqe::RqFpi(preset, opts, &wrong_shape), ContractError);
}

TEST_CASE("solves are deterministic") {
  const EnvPreset preset = mfrqe::MakeBuiltin("treasure");
  const SolveReport a = mfrqe::RqFpi(preset);
  const SolveReport b = mfrqe::RqFpi(preset);
  REQUIRE(a.final_policy.data().size() == b.final_policy.data().size());
  for (std::size_t i = 0; i < a.final_policy.data().size(); ++i) {
    CHECK(a.final_policy.data()[i] == b.final_policy.data()[i]);
  }
  CHECK(a.exploitability_trace == b.exploitability_trace);
}
