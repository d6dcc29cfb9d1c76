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
#include <cstdint>
#include <vector>

#include "mfrqe/game.hpp"
#include "mfrqe/rng.hpp"

namespace {

using mfrqe::ContractError;
using mfrqe::FlowSet;
using mfrqe::GameSpec;
using mfrqe::InitialSet;
using mfrqe::MeanFieldFlow;
using mfrqe::ModelError;
using mfrqe::Policy;
using mfrqe::ProbVector;
using mfrqe::rng::Stream;

// A small game whose transitions depend on both (t, x, u) and the flow, so
// propagation exercises every argument; rows are seed-determined.
GameSpec RandomCoupledGame(std::uint64_t seed, int n_states, int n_actions,
                           int horizon) {
  const Stream root(seed);
  GameSpec game;
  game.name = "random_coupled";
  game.n_states = n_states;
  game.n_actions = n_actions;
  game.horizon = horizon;
  game.r_max = 3.0;
  game.transition = [root, n_states](int t, int x, int u,
                                     std::span<const double> mu,
                                     std::span<double> out) {
    const Stream s = root.At(0).At(t).At(x).At(u);
    double total = 0.0;
    for (int y = 0; y < n_states; ++y) {
      // Mix a seeded positive table with a mild flow coupling.
      out[y] = 0.1 + s.Uniform(y) + 0.5 * mu[static_cast<std::size_t>(y)];
      total += out[y];
    }
    for (int y = 0; y < n_states; ++y) out[y] /= total;
  };
  game.reward = [root](int t, int x, int u, std::span<const double> mu) {
    const Stream s = root.At(1).At(t).At(x).At(u);
    return 2.0 * s.Uniform(0) - 1.0 - mu[0];
  };
  return game;
}

Policy RandomPolicy(std::uint64_t seed, int horizon, int n_states,
                    int n_actions) {
  const Stream root(seed);
  Policy pi(horizon, n_states, n_actions);
  std::vector<double> row(static_cast<std::size_t>(n_actions));
  for (int t = 0; t < horizon; ++t) {
    for (int x = 0; x < n_states; ++x) {
      const Stream s = root.At(t).At(x);
      double total = 0.0;
      for (int u = 0; u < n_actions; ++u) {
        row[static_cast<std::size_t>(u)] = 0.05 + s.Uniform(u);
        total += row[static_cast<std::size_t>(u)];
      }
      for (int u = 0; u < n_actions; ++u) {
        row[static_cast<std::size_t>(u)] /= total;
      }
      pi.SetRow(t, x, row);
    }
  }
  return pi;
}

// Reference propagation: materialize the policy-averaged transition matrix
// at each step and apply it as a dense matrix-vector product.
MeanFieldFlow DensePropagate(const GameSpec& game, const Policy& pi,
                             const ProbVector& mu0) {
  const int X = game.n_states;
  const int U = game.n_actions;
  MeanFieldFlow flow(game.horizon, X);
  std::vector<double> mu(mu0.begin(), mu0.end());
  for (int x = 0; x < X; ++x) flow.mutable_slice(0)[x] = mu[x];
  std::vector<double> trans(static_cast<std::size_t>(X));
  for (int t = 0; t < game.horizon; ++t) {
    // M[x][y] = sum_u pi(u|x) f(y|x,u,mu)
    std::vector<double> m(static_cast<std::size_t>(X) * X, 0.0);
    for (int x = 0; x < X; ++x) {
      for (int u = 0; u < U; ++u) {
        game.transition(t, x, u, mu, trans);
        const double p = pi.row(t, x)[static_cast<std::size_t>(u)];
        for (int y = 0; y < X; ++y) {
          m[static_cast<std::size_t>(x) * X + y] += p * trans[y];
        }
      }
    }
    std::vector<double> next(static_cast<std::size_t>(X), 0.0);
    for (int x = 0; x < X; ++x) {
      for (int y = 0; y < X; ++y) {
        next[y] += mu[x] * m[static_cast<std::size_t>(x) * X + y];
      }
    }
    mu = next;
    for (int x = 0; x < X; ++x) flow.mutable_slice(t + 1)[x] = mu[x];
  }
  return flow;
}

}  // namespace

TEST_CASE("probability vector construction validates") {
  CHECK_NOTHROW(ProbVector({0.5, 0.5}));
  CHECK_NOTHROW(ProbVector({1.0}));
  CHECK_THROWS_AS(ProbVector({0.5, 0.6}), ContractError);
  CHECK_THROWS_AS(ProbVector({-0.1, 1.1}), ContractError);
  CHECK_THROWS_AS(ProbVector({0.5, std::nan("")}), ContractError);
  CHECK_THROWS_AS(ProbVector(std::vector<double>{}), ContractError);

  // Drift within the construction tolerance is accepted.
  CHECK_NOTHROW(ProbVector({0.5 + 4e-10, 0.5 + 4e-10}));

  const ProbVector u = ProbVector::Uniform(4);
  CHECK(u.size() == 4);
  CHECK(u[0] == doctest::Approx(0.25));
  const ProbVector d = ProbVector::Delta(3, 2);
  CHECK(d[2] == 1.0);
  CHECK(d[0] == 0.0);
  CHECK_THROWS_AS(ProbVector::Delta(3, 5), ContractError);
  CHECK_THROWS_AS(ProbVector::Uniform(0), ContractError);
}

TEST_CASE("policy rows validate on assignment") {
  Policy pi(2, 2, 3);
  const std::vector<double> good = {0.2, 0.3, 0.5};
  const std::vector<double> bad = {0.2, 0.3, 0.6};
  CHECK_NOTHROW(pi.SetRow(0, 0, good));
  CHECK_THROWS_AS(pi.SetRow(0, 1, bad), ContractError);
  CHECK_THROWS_AS(pi.SetRow(2, 0, good), ContractError);  // t out of range
  CHECK_THROWS_AS(pi.SetRow(0, 2, good), ContractError);  // x out of range

  // The zero-filled policy fails row validation until every row is set.
  CHECK_THROWS_AS(pi.ValidateRows(), ContractError);

  const Policy u = Policy::Uniform(3, 4, 2);
  CHECK_NOTHROW(u.ValidateRows());
  CHECK(u.row(2, 3)[0] == doctest::Approx(0.5));

  CHECK(u.SameShape(Policy(3, 4, 2)));
  CHECK_FALSE(u.SameShape(Policy(3, 4, 3)));
}

TEST_CASE("checked evaluators reject broken models with location info") {
  GameSpec game = RandomCoupledGame(5, 3, 2, 4);

  SUBCASE("transition rows must sum to one") {
    game.transition = [](int, int, int, std::span<const double>,
                         std::span<double> out) {
      out[0] = 0.5;
      out[1] = 0.4;
      out[2] = 0.0;  // sums to 0.9: broken kernel, not drift
    };
    std::vector<double> mu = {1.0, 0.0, 0.0};
    std::vector<double> out(3);
    try {
      mfrqe::EvalTransitionChecked(game, 1, 2, 1, mu, out);
      FAIL("expected ModelError");
    } catch (const ModelError& e) {
      CHECK(e.t() == 1);
      CHECK(e.x() == 2);
      CHECK(e.u() == 1);
    }
  }

  SUBCASE("tiny drift is repaired silently") {
    game.transition = [](int, int, int, std::span<const double>,
                         std::span<double> out) {
      out[0] = 0.5 + 2e-13;
      out[1] = 0.5;
      out[2] = 0.0;
    };
    std::vector<double> mu = {1.0, 0.0, 0.0};
    std::vector<double> out(3);
    CHECK_NOTHROW(mfrqe::EvalTransitionChecked(game, 0, 0, 0, mu, out));
    double total = 0.0;
    for (double v : out) total += v;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-15));
  }

  SUBCASE("rewards outside the declared bound are model errors") {
    game.reward = [](int, int, int, std::span<const double>) { return 100.0; };
    std::vector<double> mu = {1.0, 0.0, 0.0};
    try {
      mfrqe::EvalRewardChecked(game, 2, 1, 0, mu);
      FAIL("expected ModelError");
    } catch (const ModelError& e) {
      CHECK(e.t() == 2);
      CHECK(e.x() == 1);
      CHECK(e.u() == 0);
    }
  }

  SUBCASE("non-finite rewards are model errors") {
    game.reward = [](int, int, int, std::span<const double>) {
      return std::nan("");
    };
    std::vector<double> mu = {1.0, 0.0, 0.0};
    CHECK_THROWS_AS(mfrqe::EvalRewardChecked(game, 0, 0, 0, mu), ModelError);
  }
}

TEST_CASE("flow propagation matches dense-matrix reference") {
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    const GameSpec game = RandomCoupledGame(seed, 4, 3, 6);
    const Policy pi = RandomPolicy(seed + 100, 6, 4, 3);
    const ProbVector mu0({0.4, 0.3, 0.2, 0.1});

    const MeanFieldFlow got = mfrqe::PropagateFlow(game, pi, mu0);
    const MeanFieldFlow want = DensePropagate(game, pi, mu0);

    REQUIRE(got.horizon() == 6);
    for (int t = 0; t <= 6; ++t) {
      for (int x = 0; x < 4; ++x) {
        CHECK(std::fabs(got.slice(t)[x] - want.slice(t)[x]) <= 1e-12);
      }
    }
  }
}

TEST_CASE("propagated flows conserve mass and stay distributions") {
  const GameSpec game = RandomCoupledGame(11, 5, 2, 8);
  const Policy pi = RandomPolicy(12, 8, 5, 2);
  const MeanFieldFlow flow =
      mfrqe::PropagateFlow(game, pi, ProbVector::Uniform(5));
  for (int t = 0; t <= 8; ++t) {
    double total = 0.0;
    for (int x = 0; x < 5; ++x) {
      const double v = flow.slice(t)[x];
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
      total += v;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("flow propagation is bitwise deterministic") {
  const GameSpec game = RandomCoupledGame(21, 4, 3, 7);
  const Policy pi = RandomPolicy(22, 7, 4, 3);
  const ProbVector mu0({0.7, 0.1, 0.1, 0.1});
  const MeanFieldFlow a = mfrqe::PropagateFlow(game, pi, mu0);
  const MeanFieldFlow b = mfrqe::PropagateFlow(game, pi, mu0);
  REQUIRE(a.data().size() == b.data().size());
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    CHECK(a.data()[i] == b.data()[i]);
  }
}

TEST_CASE("flow-set propagation is index-aligned with the initial set") {
  const GameSpec game = RandomCoupledGame(31, 3, 2, 4);
  const Policy pi = RandomPolicy(32, 4, 3, 2);
  const InitialSet initials({ProbVector::Delta(3, 0), ProbVector::Delta(3, 2)},
                            ProbVector({0.6, 0.4}));
  const FlowSet set = mfrqe::PropagateFlowSet(game, pi, initials);
  REQUIRE(set.size() == 2);
  for (int k = 0; k < 2; ++k) {
    const MeanFieldFlow single =
        mfrqe::PropagateFlow(game, pi, initials.initials[k]);
    CHECK(mfrqe::FlowDistance(set.flows[k], single) == 0.0);
  }
}

TEST_CASE("distances are metrics on their shapes") {
  const Policy a = RandomPolicy(41, 5, 3, 4);
  const Policy b = RandomPolicy(42, 5, 3, 4);
  const Policy c = RandomPolicy(43, 5, 3, 4);

  SUBCASE("identity and symmetry") {
    CHECK(mfrqe::PolicyDistance(a, a) == 0.0);
    CHECK(mfrqe::PolicyDistance(a, b) == mfrqe::PolicyDistance(b, a));
    CHECK(mfrqe::PolicyDistance(a, b) > 0.0);
    CHECK(mfrqe::PolicyL1Distance(a, a) == 0.0);
    CHECK(mfrqe::PolicyL1Distance(a, b) == mfrqe::PolicyL1Distance(b, a));
  }

  SUBCASE("triangle inequality") {
    CHECK(mfrqe::PolicyDistance(a, c) <=
          mfrqe::PolicyDistance(a, b) + mfrqe::PolicyDistance(b, c) + 1e-15);
    CHECK(mfrqe::PolicyL1Distance(a, c) <=
          mfrqe::PolicyL1Distance(a, b) + mfrqe::PolicyL1Distance(b, c) +
              1e-15);
  }

  SUBCASE("range and norm sandwich") {
    const double d_pi = mfrqe::PolicyDistance(a, b);
    const double d_l1 = mfrqe::PolicyL1Distance(a, b);
    CHECK(d_pi >= 0.0);
    CHECK(d_pi <= 1.0);  // max of per-row total variations
    // Per timestep, the summed L1 over states dominates twice the worst
    // row's total variation and is at most 2 * n_states times it.
    CHECK(d_l1 >= 2.0 * d_pi - 1e-15);
    CHECK(d_l1 <= 2.0 * 3 * d_pi + 1e-15);
  }

  SUBCASE("shape mismatches are contract errors") {
    const Policy wrong = RandomPolicy(44, 5, 3, 5);
    CHECK_THROWS_AS(mfrqe::PolicyDistance(a, wrong), ContractError);
    CHECK_THROWS_AS(mfrqe::PolicyL1Distance(a, wrong), ContractError);
  }
}

TEST_CASE("flow distances take the max over slices and set members") {
  MeanFieldFlow f1(2, 2);
  MeanFieldFlow f2(2, 2);
  for (int t = 0; t <= 2; ++t) {
    f1.mutable_slice(t)[0] = 1.0;
    f1.mutable_slice(t)[1] = 0.0;
    f2.mutable_slice(t)[0] = 1.0;
    f2.mutable_slice(t)[1] = 0.0;
  }
  // Perturb one slice only; the distance is that slice's total variation.
  f2.mutable_slice(1)[0] = 0.75;
  f2.mutable_slice(1)[1] = 0.25;
  CHECK(mfrqe::FlowDistance(f1, f2) == doctest::Approx(0.25));

  const FlowSet s1{{f1, f1}};
  const FlowSet s2{{f1, f2}};
  CHECK(mfrqe::FlowSetDistance(s1, s2) == doctest::Approx(0.25));
  CHECK_THROWS_AS(mfrqe::FlowSetDistance(s1, FlowSet{{f1}}), ContractError);
  CHECK_THROWS_AS(mfrqe::FlowSetDistance(FlowSet{}, FlowSet{}), ContractError);
}

TEST_CASE("initial sets validate weights against members") {
  CHECK_NOTHROW(InitialSet({ProbVector::Uniform(2)}, ProbVector({1.0})));
  // Weight count must match the number of initials.
  CHECK_THROWS_AS(
      InitialSet({ProbVector::Uniform(2)}, ProbVector({0.5, 0.5})),
      ContractError);
  // Members must share the number of states.
  CHECK_THROWS_AS(InitialSet({ProbVector::Uniform(2), ProbVector::Uniform(3)},
                             ProbVector({0.5, 0.5})),
                  ContractError);
}

TEST_CASE("game spec validation catches inconsistent dimensions") {
  GameSpec game = RandomCoupledGame(51, 3, 2, 4);
  CHECK_NOTHROW(game.Validate());

  GameSpec no_transition = game;
  no_transition.transition = nullptr;
  CHECK_THROWS_AS(no_transition.Validate(), ContractError);

  GameSpec bad_states = game;
  bad_states.n_states = 0;
  CHECK_THROWS_AS(bad_states.Validate(), ContractError);

  GameSpec bad_labels = game;
  bad_labels.state_labels = {"a", "b"};  // 2 labels for 3 states
  CHECK_THROWS_AS(bad_labels.Validate(), ContractError);

  GameSpec bad_rmax = game;
  bad_rmax.r_max = -1.0;
  CHECK_THROWS_AS(bad_rmax.Validate(), ContractError);
}
