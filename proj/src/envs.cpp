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

#include "mfrqe/envs.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mfrqe/rng.hpp"

namespace mfrqe {
namespace {

using nlohmann::json;

constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

std::uint64_t Fnv1a64(std::string_view s) {
  std::uint64_t h = kFnvOffset;
  for (unsigned char c : s) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

InitialSet MakeInitialSet(std::vector<std::vector<double>> initials,
                          std::vector<double> weights) {
  std::vector<ProbVector> dists;
  dists.reserve(initials.size());
  for (auto& v : initials) dists.emplace_back(std::move(v));
  return InitialSet(std::move(dists), ProbVector(std::move(weights)));
}

json InitialsToJson(const InitialSet& s) {
  json arr = json::array();
  for (const auto& d : s.initials) arr.push_back(d.values());
  return arr;
}

// Shared provenance skeleton for built-ins.
void FillCommonProvenance(EnvPreset& p, std::uint64_t seed) {
  json j;
  j["format_version"] = 1;
  j["kind"] = "builtin";
  j["name"] = p.name;
  j["regularizer"] = p.regularizer.name();
  j["alpha"] = p.risk.alpha;
  j["tau"] = p.risk.tau;
  j["fpi_iterations"] = p.fpi_iterations;
  j["fictitious_beta"] = p.fictitious_beta;
  j["horizon"] = p.game.horizon;
  j["n_states"] = p.game.n_states;
  j["n_actions"] = p.game.n_actions;
  j["r_max"] = p.game.r_max;
  j["surrogate_dynamics"] = p.surrogate_dynamics;
  j["seed"] = seed;
  j["initials"] = InitialsToJson(p.initials);
  j["weights"] = p.initials.weights.values();
  p.provenance = std::move(j);
}

int Clamp(int x, int lo, int hi) { return std::max(lo, std::min(hi, x)); }

// ---------------------------------------------------------------------------
// Config parsing helpers: every accessor carries the JSON path it is reading
// so validation failures name the offending entry.
// ---------------------------------------------------------------------------

const json& Require(const json& j, const std::string& key,
                    const std::string& path) {
  if (!j.is_object() || !j.contains(key)) {
    throw ConfigError("config: missing required entry '" + path + "'");
  }
  return j.at(key);
}

double RequireNumber(const json& j, const std::string& key,
                     const std::string& path) {
  const json& v = Require(j, key, path);
  if (!v.is_number()) {
    throw ConfigError("config: entry '" + path + "' must be a number");
  }
  return v.get<double>();
}

int RequireInt(const json& j, const std::string& key, const std::string& path) {
  const json& v = Require(j, key, path);
  if (!v.is_number_integer()) {
    throw ConfigError("config: entry '" + path + "' must be an integer");
  }
  return v.get<int>();
}

std::vector<double> NumberArray(const json& v, const std::string& path) {
  if (!v.is_array()) {
    throw ConfigError("config: entry '" + path + "' must be an array");
  }
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) {
      throw ConfigError("config: entry '" + path + "[" +
                        std::to_string(i) + "]' must be a number");
    }
    out.push_back(v[i].get<double>());
  }
  return out;
}

// Parses a [x][u][x'] transition table, validating each row as a
// distribution.
std::vector<double> ParseTransitionTable(const json& v, int X, int U,
                                         const std::string& path) {
  if (!v.is_array() || v.size() != static_cast<std::size_t>(X)) {
    throw ConfigError("config: entry '" + path + "' must be an array of " +
                      std::to_string(X) + " per-state blocks");
  }
  std::vector<double> table(static_cast<std::size_t>(X) * U * X);
  for (int x = 0; x < X; ++x) {
    const json& block = v[static_cast<std::size_t>(x)];
    const std::string block_path = path + "[" + std::to_string(x) + "]";
    if (!block.is_array() || block.size() != static_cast<std::size_t>(U)) {
      throw ConfigError("config: entry '" + block_path +
                        "' must be an array of " + std::to_string(U) +
                        " action rows");
    }
    for (int u = 0; u < U; ++u) {
      const std::string row_path =
          block_path + "[" + std::to_string(u) + "]";
      std::vector<double> row =
          NumberArray(block[static_cast<std::size_t>(u)], row_path);
      if (row.size() != static_cast<std::size_t>(X)) {
        throw ConfigError("config: entry '" + row_path + "' must have " +
                          std::to_string(X) + " next-state probabilities");
      }
      try {
        ValidateDistribution({row.data(), row.size()}, kProbConstructTol,
                             "config entry '" + row_path + "'");
      } catch (const ContractError& e) {
        throw ConfigError(e.what());
      }
      std::copy(row.begin(), row.end(),
                table.begin() + (static_cast<std::size_t>(x) * U + u) * X);
    }
  }
  return table;
}

// Parses a [x][u] reward table.
std::vector<double> ParseRewardTable(const json& v, int X, int U,
                                     const std::string& path) {
  if (!v.is_array() || v.size() != static_cast<std::size_t>(X)) {
    throw ConfigError("config: entry '" + path + "' must be an array of " +
                      std::to_string(X) + " per-state rows");
  }
  std::vector<double> table(static_cast<std::size_t>(X) * U);
  for (int x = 0; x < X; ++x) {
    const std::string row_path = path + "[" + std::to_string(x) + "]";
    std::vector<double> row =
        NumberArray(v[static_cast<std::size_t>(x)], row_path);
    if (row.size() != static_cast<std::size_t>(U)) {
      throw ConfigError("config: entry '" + row_path + "' must have " +
                        std::to_string(U) + " per-action rewards");
    }
    for (int u = 0; u < U; ++u) {
      if (!std::isfinite(row[static_cast<std::size_t>(u)])) {
        throw ConfigError("config: entry '" + row_path + "[" +
                          std::to_string(u) + "]' must be finite");
      }
    }
    std::copy(row.begin(), row.end(),
              table.begin() + static_cast<std::size_t>(x) * U);
  }
  return table;
}

}  // namespace

std::string EnvPreset::Fingerprint() const {
  const std::uint64_t h = Fnv1a64(provenance.dump());
  std::ostringstream out;
  out << std::hex;
  out.width(16);
  out.fill('0');
  out << h;
  return out.str();
}

void EnvPreset::Validate() const {
  game.Validate();
  risk.Validate();
  if (initials.size() == 0) {
    throw ContractError("preset '" + name + "': empty initial set");
  }
  if (initials.n_states() != game.n_states) {
    throw ContractError("preset '" + name +
                        "': initial distributions do not match state count");
  }
  if (fpi_iterations <= 0) {
    throw ContractError("preset '" + name +
                        "': fpi_iterations must be positive");
  }
  if (!(fictitious_beta > 0.0) || !(fictitious_beta < 1.0)) {
    throw ContractError("preset '" + name +
                        "': fictitious_beta must lie strictly in (0, 1)");
  }
}

EnvPreset MakeCongestion(RegularizerSpec::Kind kind) {
  EnvPreset p;
  p.name = "congestion";
  p.surrogate_dynamics = false;

  GameSpec& g = p.game;
  g.name = p.name;
  g.n_states = 4;
  g.n_actions = 3;
  g.horizon = 5;
  g.r_max = 2.1;
  g.state_labels = {"x0", "x1", "x2", "x3"};
  g.action_labels = {"LEFT", "RIGHT", "STAY"};
  // Deterministic movement on the 1-D grid with clamping at the ends.
  g.transition = [](int /*t*/, int x, int u, std::span<const double> /*mu*/,
                    std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    const int delta = (u == 0) ? -1 : (u == 1) ? 1 : 0;
    out[static_cast<std::size_t>(
        Clamp(x + delta, 0, static_cast<int>(out.size()) - 1))] = 1.0;
  };
  // Crowding penalty plus a movement cost.
  g.reward = [](int /*t*/, int x, int u, std::span<const double> mu) {
    return -2.0 * mu[static_cast<std::size_t>(x)] - (u == 2 ? 0.0 : 0.1);
  };

  p.initials = MakeInitialSet(
      {{0.25, 0.25, 0.25, 0.25},
       {1.0, 0.0, 0.0, 0.0},
       {0.1, 0.5, 0.2, 0.2},
       {0.0, 0.6, 0.4, 0.0}},
      {0.4, 0.1, 0.3, 0.2});

  p.regularizer = RegularizerSpec{kind};
  if (kind == RegularizerSpec::Kind::kEntropy) {
    p.risk = RiskParams{0.0667, 15.0};
  } else {
    p.risk = RiskParams{0.1667, 6.0};
  }
  p.fpi_iterations = 30;
  p.fictitious_beta = 0.3;
  FillCommonProvenance(p, 0);
  p.Validate();
  return p;
}

EnvPreset MakeSis(RegularizerSpec::Kind kind) {
  EnvPreset p;
  p.name = "sis";
  p.surrogate_dynamics = true;

  GameSpec& g = p.game;
  g.name = p.name;
  g.n_states = 2;  // 0 = susceptible, 1 = infected
  g.n_actions = 2;  // 0 = go out, 1 = distance
  g.horizon = 50;
  g.r_max = 1.5;
  g.state_labels = {"S", "I"};
  g.action_labels = {"GO_OUT", "DISTANCE"};
  // Contact-driven infection: going out exposes a susceptible agent in
  // proportion to the infected share; distancing blocks infection entirely;
  // infected agents recover with a fixed rate regardless of action.
  g.transition = [](int /*t*/, int x, int u, std::span<const double> mu,
                    std::span<double> out) {
    if (x == 0) {
      const double p_infect = (u == 0) ? 0.8 * mu[1] : 0.0;
      out[0] = 1.0 - p_infect;
      out[1] = p_infect;
    } else {
      out[0] = 0.3;  // recovery
      out[1] = 0.7;
    }
  };
  // Sickness cost plus the opportunity cost of distancing.
  g.reward = [](int /*t*/, int x, int u, std::span<const double> /*mu*/) {
    return (x == 1 ? -1.0 : 0.0) + (u == 1 ? -0.5 : 0.0);
  };

  p.initials = MakeInitialSet(
      {{1.0, 0.0}, {0.5, 0.5}, {0.0, 1.0}, {0.8, 0.2}},
      {0.3, 0.2, 0.2, 0.3});

  p.regularizer = RegularizerSpec{kind};
  p.risk = RiskParams{0.2, 5.0};
  p.fpi_iterations = 25;
  p.fictitious_beta = 0.3;
  FillCommonProvenance(p, 0);
  p.Validate();
  return p;
}

namespace {

EnvPreset MakeBeachBar(RegularizerSpec::Kind kind) {
  EnvPreset p;
  p.name = "beach_bar";
  p.surrogate_dynamics = true;

  GameSpec& g = p.game;
  g.name = p.name;
  g.n_states = 4;
  g.n_actions = 3;
  g.horizon = 2;
  g.r_max = 2.1;
  g.action_labels = {"LEFT", "RIGHT", "STAY"};
  // Positions on a short beach with the bar at position 2: agents trade off
  // proximity to the bar against crowding and movement cost.
  g.transition = [](int /*t*/, int x, int u, std::span<const double> /*mu*/,
                    std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    const int delta = (u == 0) ? -1 : (u == 1) ? 1 : 0;
    out[static_cast<std::size_t>(
        Clamp(x + delta, 0, static_cast<int>(out.size()) - 1))] = 1.0;
  };
  g.reward = [](int /*t*/, int x, int u, std::span<const double> mu) {
    return -std::abs(x - 2) / 3.0 - mu[static_cast<std::size_t>(x)] -
           (u == 2 ? 0.0 : 0.1);
  };

  p.initials = MakeInitialSet(
      {{0.3, 0.2, 0.1, 0.4},
       {0.3, 0.3, 0.1, 0.3},
       {0.2, 0.2, 0.1, 0.5},
       {0.25, 0.1, 0.25, 0.4},
       {0.0, 0.0, 0.0, 1.0}},
      {0.25, 0.25, 0.2, 0.2, 0.1});

  p.regularizer = RegularizerSpec{kind};
  p.risk = RiskParams{0.5, 2.0};
  p.fpi_iterations = 15;
  p.fictitious_beta = 0.3;
  return p;
}

EnvPreset MakeTreasure(RegularizerSpec::Kind kind) {
  EnvPreset p;
  p.name = "treasure";
  p.surrogate_dynamics = true;

  GameSpec& g = p.game;
  g.name = p.name;
  g.n_states = 3;  // 0 = camp, 1 = trail, 2 = site
  g.n_actions = 2;  // 0 = advance, 1 = retreat
  g.horizon = 5;
  g.r_max = 1.1;
  g.state_labels = {"camp", "trail", "site"};
  g.action_labels = {"ADVANCE", "RETREAT"};
  // Advancing succeeds with probability 0.7; retreating always works.  The
  // payoff at the site is eroded when too much of the population shows up.
  g.transition = [](int /*t*/, int x, int u, std::span<const double> /*mu*/,
                    std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    if (u == 0) {
      const int up = Clamp(x + 1, 0, 2);
      out[static_cast<std::size_t>(up)] += 0.7;
      out[static_cast<std::size_t>(x)] += 0.3;
    } else {
      out[static_cast<std::size_t>(Clamp(x - 1, 0, 2))] = 1.0;
    }
  };
  g.reward = [](int /*t*/, int x, int u, std::span<const double> mu) {
    const double dig = (x == 2) ? 1.0 - 1.5 * mu[2] : 0.0;
    return dig - (u == 0 ? 0.1 : 0.0);
  };

  p.initials = MakeInitialSet(
      {{0.40, 0.35, 0.25},
       {0.41, 0.34, 0.25},
       {0.39, 0.36, 0.25},
       {0.41, 0.35, 0.24},
       {0.39, 0.35, 0.26},
       {0.40, 0.36, 0.24},
       {0.40, 0.34, 0.26},
       {0.405, 0.355, 0.24},
       {0.39, 0.355, 0.255},
       {0.405, 0.34, 0.255}},
      {0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1});

  p.regularizer = RegularizerSpec{kind};
  if (kind == RegularizerSpec::Kind::kEntropy) {
    p.risk = RiskParams{0.6667, 1.5};
  } else {
    p.risk = RiskParams{0.25, 4.0};
  }
  p.fpi_iterations = 10;
  p.fictitious_beta = 0.3;
  return p;
}

EnvPreset MakeLinearQuadratic(RegularizerSpec::Kind kind) {
  EnvPreset p;
  p.name = "linear_quadratic";
  p.surrogate_dynamics = true;

  GameSpec& g = p.game;
  g.name = p.name;
  g.n_states = 11;  // positions -5..5
  g.n_actions = 3;  // 0 = down, 1 = hold, 2 = up
  g.horizon = 3;
  g.r_max = 2.2;
  g.action_labels = {"DOWN", "HOLD", "UP"};
  // Noisy single-step integrator; the quadratic cost tracks the population
  // mean position.
  g.transition = [](int /*t*/, int x, int u, std::span<const double> /*mu*/,
                    std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    const int hi = static_cast<int>(out.size()) - 1;
    const int base = Clamp(x + (u - 1), 0, hi);
    out[static_cast<std::size_t>(Clamp(base - 1, 0, hi))] += 0.1;
    out[static_cast<std::size_t>(base)] += 0.8;
    out[static_cast<std::size_t>(Clamp(base + 1, 0, hi))] += 0.1;
  };
  g.reward = [](int /*t*/, int x, int u, std::span<const double> mu) {
    double mean = 0.0;
    for (std::size_t y = 0; y < mu.size(); ++y) {
      mean += (static_cast<double>(y) - 5.0) * mu[y];
    }
    const double dev = (static_cast<double>(x) - 5.0) - mean;
    return -0.5 * dev * dev / 25.0 - 0.1 * std::abs(u - 1);
  };

  p.initials = MakeInitialSet(
      {{0.09, 0.09, 0.09, 0.09, 0.09, 0.09, 0.09, 0.09, 0.09, 0.09, 0.10},
       {0.19, 0.09, 0.09, 0.09, 0.09, 0.09, 0.09, 0.09, 0.09, 0.09, 0.00},
       {0.09, 0.18, 0.09, 0.09, 0.09, 0.09, 0.09, 0.09, 0.09, 0.01, 0.09}},
      {0.5, 0.3, 0.2});

  p.regularizer = RegularizerSpec{kind};
  p.risk = RiskParams{1.0, 1.0};
  p.fpi_iterations = 10;
  p.fictitious_beta = 0.3;
  return p;
}

EnvPreset MakeRandomLinear(RegularizerSpec::Kind kind, std::uint64_t seed) {
  EnvPreset p;
  p.name = "random_linear";
  p.surrogate_dynamics = true;

  const int X = 5;
  const int U = 4;

  // Seeded static tables: positive row-normalized transitions and rewards
  // drawn uniformly from [-1, 1].
  const rng::Stream stream(seed);
  std::vector<double> trans(static_cast<std::size_t>(X) * U * X);
  std::vector<double> rew(static_cast<std::size_t>(X) * U);
  for (int x = 0; x < X; ++x) {
    for (int u = 0; u < U; ++u) {
      const rng::Stream cell = stream.At(0).At(static_cast<std::uint64_t>(x))
                                   .At(static_cast<std::uint64_t>(u));
      double sum = 0.0;
      for (int y = 0; y < X; ++y) {
        // Bounded away from zero so every row is well-conditioned.
        const double w = 0.1 + cell.Uniform(static_cast<std::uint64_t>(y));
        trans[(static_cast<std::size_t>(x) * U + u) * X + y] = w;
        sum += w;
      }
      for (int y = 0; y < X; ++y) {
        trans[(static_cast<std::size_t>(x) * U + u) * X + y] /= sum;
      }
      rew[static_cast<std::size_t>(x) * U + u] =
          2.0 * stream.At(1).At(static_cast<std::uint64_t>(x))
                    .Uniform(static_cast<std::uint64_t>(u)) -
          1.0;
    }
  }

  GameSpec& g = p.game;
  g.name = p.name;
  g.n_states = X;
  g.n_actions = U;
  g.horizon = 3;
  g.r_max = 1.0;
  g.transition = [trans, X, U](int /*t*/, int x, int u,
                               std::span<const double> /*mu*/,
                               std::span<double> out) {
    const double* row = trans.data() + (static_cast<std::size_t>(x) * U + u) * X;
    std::copy(row, row + X, out.begin());
  };
  g.reward = [rew, U](int /*t*/, int x, int u,
                      std::span<const double> /*mu*/) {
    return rew[static_cast<std::size_t>(x) * U + u];
  };

  p.initials = MakeInitialSet(
      {{0.2, 0.2, 0.2, 0.2, 0.2},
       {0.8, 0.05, 0.05, 0.05, 0.05},
       {0.05, 0.8, 0.05, 0.05, 0.05},
       {0.5, 0.5, 0.0, 0.0, 0.0},
       {0.4, 0.3, 0.3, 0.0, 0.0},
       {0.1, 0.2, 0.3, 0.2, 0.2},
       {0.4, 0.25, 0.15, 0.1, 0.1},
       {0.0, 0.6, 0.2, 0.1, 0.1}},
      {0.12, 0.08, 0.15, 0.10, 0.20, 0.05, 0.18, 0.12});

  p.regularizer = RegularizerSpec{kind};
  if (kind == RegularizerSpec::Kind::kEntropy) {
    p.risk = RiskParams{0.0357, 28.0};
  } else {
    p.risk = RiskParams{0.025, 40.0};
  }
  p.fpi_iterations = 10;
  p.fictitious_beta = 0.3;
  return p;
}

EnvPreset MakeRps(RegularizerSpec::Kind kind) {
  EnvPreset p;
  p.name = "rps";
  p.surrogate_dynamics = true;

  GameSpec& g = p.game;
  g.name = p.name;
  g.n_states = 4;  // 0 = neutral, then last hand played
  g.n_actions = 3;  // rock, paper, scissors
  g.horizon = 7;
  g.r_max = 1.0;
  g.state_labels = {"neutral", "rock", "paper", "scissors"};
  g.action_labels = {"ROCK", "PAPER", "SCISSORS"};
  // The state records the hand just played; payoffs are against the current
  // population mix (rock beats scissors beats paper beats rock).
  g.transition = [](int /*t*/, int /*x*/, int u,
                    std::span<const double> /*mu*/, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    out[static_cast<std::size_t>(u + 1)] = 1.0;
  };
  g.reward = [](int /*t*/, int /*x*/, int u, std::span<const double> mu) {
    switch (u) {
      case 0: return mu[3] - mu[2];  // rock: beats scissors, loses to paper
      case 1: return mu[1] - mu[3];  // paper: beats rock, loses to scissors
      default: return mu[2] - mu[1];  // scissors: beats paper, loses to rock
    }
  };

  p.initials = MakeInitialSet(
      {{1.0, 0.0, 0.0, 0.0},
       {0.9, 0.1, 0.0, 0.0},
       {0.8, 0.1, 0.1, 0.0},
       {0.7, 0.1, 0.1, 0.1},
       {0.4, 0.3, 0.2, 0.1}},
      {0.4, 0.25, 0.15, 0.1, 0.1});

  p.regularizer = RegularizerSpec{kind};
  p.risk = RiskParams{0.1, 10.0};
  p.fpi_iterations = 15;
  p.fictitious_beta = 0.3;
  return p;
}

}  // namespace

EnvPreset MakeSurrogate(std::string_view name, std::uint64_t seed,
                        RegularizerSpec::Kind kind) {
  EnvPreset p;
  if (name == "beach_bar") {
    p = MakeBeachBar(kind);
  } else if (name == "treasure") {
    p = MakeTreasure(kind);
  } else if (name == "linear_quadratic") {
    p = MakeLinearQuadratic(kind);
  } else if (name == "random_linear") {
    p = MakeRandomLinear(kind, seed);
  } else if (name == "rps") {
    p = MakeRps(kind);
  } else {
    throw ConfigError("unknown surrogate environment '" + std::string(name) +
                      "'");
  }
  FillCommonProvenance(p, seed);
  p.Validate();
  return p;
}

EnvPreset MakeBuiltin(std::string_view name, RegularizerSpec::Kind kind,
                      std::uint64_t seed) {
  if (name == "congestion") return MakeCongestion(kind);
  if (name == "sis") return MakeSis(kind);
  return MakeSurrogate(name, seed, kind);
}

const std::vector<std::string>& BuiltinNames() {
  static const std::vector<std::string> names = {
      "congestion", "sis",           "beach_bar", "treasure",
      "linear_quadratic", "random_linear", "rps"};
  return names;
}

EnvPreset MakeFromConfig(const json& config) {
  if (!config.is_object()) {
    throw ConfigError("config: environment definition must be an object");
  }

  EnvPreset p;
  p.name = config.contains("name") && config.at("name").is_string()
               ? config.at("name").get<std::string>()
               : "custom";
  p.surrogate_dynamics = true;

  const int X = RequireInt(config, "n_states", "env.n_states");
  const int U = RequireInt(config, "n_actions", "env.n_actions");
  const int T = RequireInt(config, "horizon", "env.horizon");
  if (X <= 0) throw ConfigError("config: entry 'env.n_states' must be positive");
  if (U <= 0) throw ConfigError("config: entry 'env.n_actions' must be positive");
  if (T <= 0) throw ConfigError("config: entry 'env.horizon' must be positive");

  std::vector<double> trans = ParseTransitionTable(
      Require(config, "transitions", "env.transitions"), X, U,
      "env.transitions");
  std::vector<double> rew = ParseRewardTable(
      Require(config, "rewards", "env.rewards"), X, U, "env.rewards");

  // Optional population coupling: evaluators interpolate affinely between
  // the base tables and an alternate pair, weighted by a designated
  // coordinate of the current distribution.
  bool coupled = false;
  int coupling_state = 0;
  std::vector<double> trans_alt;
  std::vector<double> rew_alt;
  if (config.contains("mu_coupling")) {
    const json& c = config.at("mu_coupling");
    if (!c.is_object()) {
      throw ConfigError("config: entry 'env.mu_coupling' must be an object");
    }
    coupled = true;
    coupling_state = RequireInt(c, "state", "env.mu_coupling.state");
    if (coupling_state < 0 || coupling_state >= X) {
      throw ConfigError(
          "config: entry 'env.mu_coupling.state' must name a valid state");
    }
    trans_alt = ParseTransitionTable(
        Require(c, "transitions_alt", "env.mu_coupling.transitions_alt"), X,
        U, "env.mu_coupling.transitions_alt");
    rew_alt = ParseRewardTable(
        Require(c, "rewards_alt", "env.mu_coupling.rewards_alt"), X, U,
        "env.mu_coupling.rewards_alt");
  }

  double r_bound = 0.0;
  for (double r : rew) r_bound = std::max(r_bound, std::fabs(r));
  for (double r : rew_alt) r_bound = std::max(r_bound, std::fabs(r));
  if (r_bound == 0.0) r_bound = 1.0;  // all-zero rewards still need a bound

  GameSpec& g = p.game;
  g.name = p.name;
  g.n_states = X;
  g.n_actions = U;
  g.horizon = T;
  g.r_max = r_bound;
  if (!coupled) {
    g.transition = [trans, X, U](int /*t*/, int x, int u,
                                 std::span<const double> /*mu*/,
                                 std::span<double> out) {
      const double* row =
          trans.data() + (static_cast<std::size_t>(x) * U + u) * X;
      std::copy(row, row + X, out.begin());
    };
    g.reward = [rew, U](int /*t*/, int x, int u,
                        std::span<const double> /*mu*/) {
      return rew[static_cast<std::size_t>(x) * U + u];
    };
  } else {
    g.transition = [trans, trans_alt, coupling_state, X, U](
                       int /*t*/, int x, int u, std::span<const double> mu,
                       std::span<double> out) {
      const double w = mu[static_cast<std::size_t>(coupling_state)];
      const std::size_t base = (static_cast<std::size_t>(x) * U + u) * X;
      for (int y = 0; y < X; ++y) {
        out[static_cast<std::size_t>(y)] =
            (1.0 - w) * trans[base + y] + w * trans_alt[base + y];
      }
    };
    g.reward = [rew, rew_alt, coupling_state, U](
                   int /*t*/, int x, int u, std::span<const double> mu) {
      const double w = mu[static_cast<std::size_t>(coupling_state)];
      const std::size_t idx = static_cast<std::size_t>(x) * U + u;
      return (1.0 - w) * rew[idx] + w * rew_alt[idx];
    };
  }

  // Initial distributions and their prior.
  const json& inits = Require(config, "initials", "env.initials");
  if (!inits.is_array() || inits.empty()) {
    throw ConfigError(
        "config: entry 'env.initials' must be a non-empty array");
  }
  std::vector<ProbVector> dists;
  for (std::size_t k = 0; k < inits.size(); ++k) {
    const std::string path = "env.initials[" + std::to_string(k) + "]";
    std::vector<double> v = NumberArray(inits[k], path);
    if (v.size() != static_cast<std::size_t>(X)) {
      throw ConfigError("config: entry '" + path + "' must have " +
                        std::to_string(X) + " entries");
    }
    try {
      dists.emplace_back(std::move(v));
    } catch (const ContractError& e) {
      throw ConfigError("config: entry '" + path + "': " + e.what());
    }
  }
  std::vector<double> weights =
      NumberArray(Require(config, "weights", "env.weights"), "env.weights");
  if (weights.size() != dists.size()) {
    throw ConfigError(
        "config: entry 'env.weights' must match the number of initials");
  }
  try {
    p.initials = InitialSet(std::move(dists), ProbVector(std::move(weights)));
  } catch (const ContractError& e) {
    throw ConfigError("config: entry 'env.weights': " + std::string(e.what()));
  }

  // Risk, regularizer and solver budgets.
  p.risk.alpha = RequireNumber(config, "alpha", "env.alpha");
  p.risk.tau = RequireNumber(config, "tau", "env.tau");
  if (!(p.risk.alpha > 0.0) || !std::isfinite(p.risk.alpha)) {
    throw ConfigError("config: entry 'env.alpha' must be positive and finite");
  }
  if (!(p.risk.tau > 0.0) || !std::isfinite(p.risk.tau)) {
    throw ConfigError("config: entry 'env.tau' must be positive and finite");
  }
  p.fpi_iterations = RequireInt(config, "fpi_iterations", "env.fpi_iterations");
  if (p.fpi_iterations <= 0) {
    throw ConfigError("config: entry 'env.fpi_iterations' must be positive");
  }
  p.fictitious_beta = config.contains("fictitious_beta")
                          ? RequireNumber(config, "fictitious_beta",
                                          "env.fictitious_beta")
                          : 0.3;
  if (!(p.fictitious_beta > 0.0) || !(p.fictitious_beta < 1.0)) {
    throw ConfigError(
        "config: entry 'env.fictitious_beta' must lie strictly in (0, 1)");
  }
  std::string reg_name = "entropy";
  if (config.contains("regularizer")) {
    const json& r = config.at("regularizer");
    if (!r.is_string()) {
      throw ConfigError("config: entry 'env.regularizer' must be a string");
    }
    reg_name = r.get<std::string>();
  }
  p.regularizer = RegularizerSpec::FromName(reg_name);

  json prov;
  prov["format_version"] = 1;
  prov["kind"] = "config";
  prov["env"] = config;
  p.provenance = std::move(prov);

  try {
    p.Validate();
  } catch (const ContractError& e) {
    throw ConfigError("config: " + std::string(e.what()));
  }
  return p;
}

}  // namespace mfrqe
