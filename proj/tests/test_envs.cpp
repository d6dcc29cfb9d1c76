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

#include <cctype>
#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "mfrqe/envs.hpp"
#include "mfrqe/game.hpp"

namespace {

using mfrqe::ConfigError;
using mfrqe::EnvPreset;
using mfrqe::Policy;
using mfrqe::ProbVector;

nlohmann::json MinimalConfig() {
  return nlohmann::json{
      {"n_states", 2},
      {"n_actions", 2},
      {"horizon", 3},
      {"transitions",
       {{{1.0, 0.0}, {0.5, 0.5}}, {{0.2, 0.8}, {0.0, 1.0}}}},
      {"rewards", {{0.0, -0.5}, {-1.0, -0.5}}},
      {"initials", {{1.0, 0.0}, {0.5, 0.5}}},
      {"weights", {0.5, 0.5}},
      {"alpha", 2.0},
      {"tau", 0.5},
      {"fpi_iterations", 10},
      {"regularizer", "entropy"},
  };
}

}  // namespace

TEST_CASE("every builtin preset validates and is well-formed") {
  for (const std::string& name : mfrqe::BuiltinNames()) {
    CAPTURE(name);
    const EnvPreset preset = mfrqe::MakeBuiltin(name);
    CHECK_NOTHROW(preset.Validate());
    CHECK(preset.name == name);
    CHECK(preset.initials.size() >= 1);
    CHECK(preset.initials.n_states() == preset.game.n_states);
    CHECK(preset.fpi_iterations > 0);
    CHECK(preset.fictitious_beta > 0.0);
    CHECK(preset.fictitious_beta < 1.0);
    CHECK(preset.risk.alpha > 0.0);
    CHECK(preset.risk.tau > 0.0);
    // Provenance must identify the preset and carry its numbers.
    CHECK(preset.provenance.at("name") == name);
    CHECK(preset.provenance.at("kind") == "builtin");
    CHECK(preset.provenance.contains("alpha"));
    CHECK(preset.provenance.contains("tau"));
    CHECK(preset.provenance.contains("initials"));
  }
  CHECK(mfrqe::BuiltinNames().size() == 7);
}

TEST_CASE("unknown builtin names are config errors") {
  CHECK_THROWS_AS(mfrqe::MakeBuiltin("asteroids"), ConfigError);
  CHECK_THROWS_AS(mfrqe::MakeSurrogate("congestion", 0), ConfigError);
}

TEST_CASE("congestion preset pins the published parameterization") {
  const EnvPreset preset = mfrqe::MakeCongestion();
  CHECK(preset.game.n_states == 4);
  CHECK(preset.game.n_actions == 3);
  CHECK(preset.game.horizon == 5);
  CHECK(preset.risk.alpha == doctest::Approx(15.0));
  CHECK(preset.risk.tau == doctest::Approx(1.0 / 15.0).epsilon(1e-3));
  CHECK(preset.fpi_iterations == 30);
  CHECK_FALSE(preset.surrogate_dynamics);
  REQUIRE(preset.initials.size() == 4);
  // Prior over initial distributions.
  CHECK(preset.initials.weights[0] == doctest::Approx(0.4));
  CHECK(preset.initials.weights[1] == doctest::Approx(0.1));
  CHECK(preset.initials.weights[2] == doctest::Approx(0.3));
  CHECK(preset.initials.weights[3] == doctest::Approx(0.2));
  // Second initial concentrates everyone at the left edge.
  CHECK(preset.initials.initials[1][0] == doctest::Approx(1.0));

  SUBCASE("movement costs only off the STAY action") {
    const std::vector<double> mu = {0.25, 0.25, 0.25, 0.25};
    // reward = -2 mu(x) - 0.1 [u != STAY]; STAY is the last action.
    const int kStay = 2;
    CHECK(preset.game.reward(0, 1, kStay, mu) == doctest::Approx(-0.5));
    CHECK(preset.game.reward(0, 1, 0, mu) == doctest::Approx(-0.6));
    CHECK(preset.game.reward(3, 2, 1, mu) == doctest::Approx(-0.6));
  }

  SUBCASE("moves are deterministic with clamped edges") {
    const std::vector<double> mu = {0.25, 0.25, 0.25, 0.25};
    std::vector<double> out(4);
    // LEFT from the left edge stays put.
    preset.game.transition(0, 0, 0, mu, out);
    CHECK(out[0] == doctest::Approx(1.0));
    // RIGHT from state 1 lands on state 2.
    preset.game.transition(0, 1, 1, mu, out);
    CHECK(out[2] == doctest::Approx(1.0));
    // RIGHT from the right edge stays put.
    preset.game.transition(0, 3, 1, mu, out);
    CHECK(out[3] == doctest::Approx(1.0));
  }

  SUBCASE("log-barrier variant swaps the published hyperparameters") {
    const EnvPreset lb =
        mfrqe::MakeCongestion(mfrqe::RegularizerSpec::Kind::kLogBarrier);
    CHECK(lb.risk.alpha == doctest::Approx(6.0));
    CHECK(lb.risk.tau == doctest::Approx(1.0 / 6.0).epsilon(1e-3));
    CHECK(std::string_view(lb.regularizer.name()) == "log_barrier");
  }
}

TEST_CASE("sis preset pins structure and epidemic invariants") {
  const EnvPreset preset = mfrqe::MakeSis();
  CHECK(preset.game.n_states == 2);
  CHECK(preset.game.n_actions == 2);
  CHECK(preset.game.horizon == 50);
  CHECK(preset.surrogate_dynamics);
  CHECK(preset.risk.alpha == doctest::Approx(5.0));
  CHECK(preset.risk.tau == doctest::Approx(0.2));
  REQUIRE(preset.initials.size() == 4);

  const int kS = 0;
  const int kI = 1;
  const int kGoOut = 0;
  const int kDistance = 1;

  SUBCASE("distancing prevents infection entirely") {
    const std::vector<double> mu = {0.3, 0.7};
    std::vector<double> out(2);
    preset.game.transition(0, kS, kDistance, mu, out);
    CHECK(out[kI] == doctest::Approx(0.0));
    CHECK(out[kS] == doctest::Approx(1.0));
  }

  SUBCASE("infection risk scales with the infected share") {
    std::vector<double> out(2);
    const std::vector<double> none = {1.0, 0.0};
    preset.game.transition(0, kS, kGoOut, none, out);
    CHECK(out[kI] == doctest::Approx(0.0));
    const std::vector<double> half = {0.5, 0.5};
    preset.game.transition(0, kS, kGoOut, half, out);
    CHECK(out[kI] == doctest::Approx(0.4));  // 0.8 * mu(I)
  }

  SUBCASE("recovery rate is action-independent") {
    std::vector<double> out(2);
    const std::vector<double> mu = {0.5, 0.5};
    preset.game.transition(0, kI, kGoOut, mu, out);
    CHECK(out[kS] == doctest::Approx(0.3));
    preset.game.transition(0, kI, kDistance, mu, out);
    CHECK(out[kS] == doctest::Approx(0.3));
  }

  SUBCASE("an uninfected population stays uninfected forever") {
    const Policy pi = Policy::Uniform(50, 2, 2);
    const mfrqe::MeanFieldFlow flow =
        mfrqe::PropagateFlow(preset.game, pi, ProbVector::Delta(2, kS));
    for (int t = 0; t <= 50; ++t) {
      CHECK(flow.slice(t)[kI] == doctest::Approx(0.0));
    }
  }

  SUBCASE("a fully infected population recovers at rate 0.3") {
    const Policy pi = Policy::Uniform(50, 2, 2);
    const mfrqe::MeanFieldFlow flow =
        mfrqe::PropagateFlow(preset.game, pi, ProbVector::Delta(2, kI));
    CHECK(flow.slice(1)[kS] == doctest::Approx(0.3));
    CHECK(flow.slice(1)[kI] == doctest::Approx(0.7));
  }

  SUBCASE("rewards charge infection and distancing") {
    const std::vector<double> mu = {0.5, 0.5};
    CHECK(preset.game.reward(0, kS, kGoOut, mu) == doctest::Approx(0.0));
    CHECK(preset.game.reward(0, kS, kDistance, mu) == doctest::Approx(-0.5));
    CHECK(preset.game.reward(0, kI, kGoOut, mu) == doctest::Approx(-1.0));
    CHECK(preset.game.reward(0, kI, kDistance, mu) == doctest::Approx(-1.5));
  }
}

TEST_CASE("random_linear tables are seed-determined and flow-independent") {
  const EnvPreset a = mfrqe::MakeSurrogate("random_linear", 0);
  const EnvPreset b = mfrqe::MakeSurrogate("random_linear", 0);
  const EnvPreset c = mfrqe::MakeSurrogate("random_linear", 1);

  const std::vector<double> mu1(static_cast<std::size_t>(a.game.n_states),
                                1.0 / a.game.n_states);
  std::vector<double> mu2(static_cast<std::size_t>(a.game.n_states), 0.0);
  mu2[0] = 1.0;

  std::vector<double> oa(static_cast<std::size_t>(a.game.n_states));
  std::vector<double> ob(oa.size());
  bool differs_from_c = false;
  for (int x = 0; x < a.game.n_states; ++x) {
    for (int u = 0; u < a.game.n_actions; ++u) {
      a.game.transition(0, x, u, mu1, oa);
      b.game.transition(0, x, u, mu1, ob);
      for (std::size_t y = 0; y < oa.size(); ++y) {
        CHECK(oa[y] == ob[y]);  // same seed, bitwise identical
      }
      // Flow-independence: evaluating at a different mu changes nothing.
      a.game.transition(0, x, u, mu2, ob);
      for (std::size_t y = 0; y < oa.size(); ++y) {
        CHECK(oa[y] == ob[y]);
      }
      CHECK(a.game.reward(0, x, u, mu1) == b.game.reward(0, x, u, mu1));
      CHECK(a.game.reward(0, x, u, mu1) == a.game.reward(0, x, u, mu2));
      c.game.transition(0, x, u, mu1, ob);
      for (std::size_t y = 0; y < oa.size(); ++y) {
        if (oa[y] != ob[y]) differs_from_c = true;
      }
    }
  }
  CHECK(differs_from_c);
}

TEST_CASE("fingerprints identify configurations") {
  const std::string fp1 = mfrqe::MakeCongestion().Fingerprint();
  const std::string fp2 = mfrqe::MakeCongestion().Fingerprint();
  CHECK(fp1 == fp2);  // deterministic
  CHECK(fp1.size() == 16);
  for (char ch : fp1) {
    CHECK(std::isxdigit(static_cast<unsigned char>(ch)));
  }

  // Different presets, regularizers, and seeds hash differently.
  CHECK(fp1 != mfrqe::MakeSis().Fingerprint());
  CHECK(fp1 !=
        mfrqe::MakeCongestion(mfrqe::RegularizerSpec::Kind::kLogBarrier)
            .Fingerprint());
  CHECK(mfrqe::MakeSurrogate("random_linear", 0).Fingerprint() !=
        mfrqe::MakeSurrogate("random_linear", 1).Fingerprint());

  // Provenance edits (how the CLI records overrides) change the hash.
  EnvPreset tweaked = mfrqe::MakeCongestion();
  tweaked.provenance["overrides"] = {{"alpha", 150.0}};
  CHECK(tweaked.Fingerprint() != fp1);
}

TEST_CASE("config-built environments evaluate their tables") {
  const EnvPreset preset = mfrqe::MakeFromConfig(MinimalConfig());
  CHECK(preset.game.n_states == 2);
  CHECK(preset.game.n_actions == 2);
  CHECK(preset.game.horizon == 3);
  CHECK(preset.initials.size() == 2);
  CHECK(preset.provenance.at("kind") == "config");
  CHECK_NOTHROW(preset.Validate());

  const std::vector<double> mu = {0.5, 0.5};
  std::vector<double> out(2);
  preset.game.transition(0, 0, 0, mu, out);
  CHECK(out[0] == doctest::Approx(1.0));
  preset.game.transition(2, 1, 0, mu, out);
  CHECK(out[0] == doctest::Approx(0.2));
  CHECK(preset.game.reward(0, 1, 0, mu) == doctest::Approx(-1.0));

  SUBCASE("mean-field coupling interpolates the alternate tables") {
    nlohmann::json cfg = MinimalConfig();
    cfg["mu_coupling"] = {
        {"state", 1},
        {"transitions_alt",
         {{{0.0, 1.0}, {0.5, 0.5}}, {{0.2, 0.8}, {1.0, 0.0}}}},
        {"rewards_alt", {{-1.0, -0.5}, {-1.0, -0.5}}},
    };
    const EnvPreset coupled = mfrqe::MakeFromConfig(cfg);
    // At mu(1) = 0 the base tables apply; at mu(1) = 1 the alternates.
    std::vector<double> o(2);
    const std::vector<double> low = {1.0, 0.0};
    coupled.game.transition(0, 0, 0, low, o);
    CHECK(o[0] == doctest::Approx(1.0));
    const std::vector<double> high = {0.0, 1.0};
    coupled.game.transition(0, 0, 0, high, o);
    CHECK(o[1] == doctest::Approx(1.0));
    // Halfway, the rows blend.
    const std::vector<double> mid = {0.5, 0.5};
    coupled.game.transition(0, 0, 0, mid, o);
    CHECK(o[0] == doctest::Approx(0.5));
    CHECK(coupled.game.reward(0, 0, 0, high) == doctest::Approx(-1.0));
    CHECK(coupled.game.reward(0, 0, 0, mid) == doctest::Approx(-0.5));
  }
}

TEST_CASE("config errors name the offending entry") {
  SUBCASE("broken transition row") {
    nlohmann::json cfg = MinimalConfig();
    cfg["transitions"][0][0] = {0.9, 0.0};  // sums to 0.9
    try {
      mfrqe::MakeFromConfig(cfg);
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("transitions") != std::string::npos);
    }
  }

  SUBCASE("missing required key") {
    nlohmann::json cfg = MinimalConfig();
    cfg.erase("rewards");
    CHECK_THROWS_AS(mfrqe::MakeFromConfig(cfg), ConfigError);
  }

  SUBCASE("unknown regularizer") {
    nlohmann::json cfg = MinimalConfig();
    cfg["regularizer"] = "lasso";
    CHECK_THROWS_AS(mfrqe::MakeFromConfig(cfg), ConfigError);
  }

  SUBCASE("nonpositive temperature") {
    nlohmann::json cfg = MinimalConfig();
    cfg["tau"] = 0.0;
    CHECK_THROWS_AS(mfrqe::MakeFromConfig(cfg), ConfigError);
  }

  SUBCASE("weights not matching initials") {
    nlohmann::json cfg = MinimalConfig();
    cfg["weights"] = {1.0};
    CHECK_THROWS_AS(mfrqe::MakeFromConfig(cfg), ConfigError);
  }

  SUBCASE("shape mismatch in reward table") {
    nlohmann::json cfg = MinimalConfig();
    cfg["rewards"] = {{0.0}, {-1.0}};  // one action instead of two
    CHECK_THROWS_AS(mfrqe::MakeFromConfig(cfg), ConfigError);
  }
}

TEST_CASE("preset validation rejects inconsistent bundles") {
  EnvPreset preset = mfrqe::MakeCongestion();
  preset.fpi_iterations = 0;
  CHECK_THROWS_AS(preset.Validate(), mfrqe::ContractError);

  preset = mfrqe::MakeCongestion();
  preset.fictitious_beta = 1.0;
  CHECK_THROWS_AS(preset.Validate(), mfrqe::ContractError);

  preset = mfrqe::MakeCongestion();
  preset.initials = mfrqe::InitialSet({ProbVector::Uniform(3)},
                                      ProbVector({1.0}));
  CHECK_THROWS_AS(preset.Validate(), mfrqe::ContractError);
}
