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

#ifndef MFRQE_ENVS_H_
#define MFRQE_ENVS_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mfrqe/game.hpp"
#include "mfrqe/risk.hpp"

namespace mfrqe {

// A ready-to-solve bundle: game, candidate initial distributions, risk and
// regularization parameters, and solver budgets.
struct EnvPreset {
  std::string name;
  GameSpec game;
  InitialSet initials;
  RiskParams risk;  // {tau, alpha}
  RegularizerSpec regularizer;
  int fpi_iterations = 0;
  double fictitious_beta = 0.0;  // averaging factor in (0, 1)
  // True when the environment's dynamics are an in-repo stand-in rather than
  // an externally pinned model; quantitative reference values only exist for
  // non-surrogate environments.
  bool surrogate_dynamics = false;
  // Canonical parameterization: every number needed to rebuild the preset.
  nlohmann::json provenance;

  // FNV-1a (64-bit, hex) over the canonical provenance dump; identifies the
  // configuration in every exported artifact.
  std::string Fingerprint() const;

  void Validate() const;
};

// 1-D congestion on four states: actions {LEFT, RIGHT, STAY} move
// deterministically with boundary clamping; reward -2*mu(x) - 0.1*[u != STAY].
EnvPreset MakeCongestion(
    RegularizerSpec::Kind kind = RegularizerSpec::Kind::kEntropy);

// Epidemic (susceptible/infected) game over T=50 with contact-driven
// infection; the dynamics are an in-repo surrogate (see source).
EnvPreset MakeSis(RegularizerSpec::Kind kind = RegularizerSpec::Kind::kEntropy);

// Surrogate benchmark family: "beach_bar", "treasure", "linear_quadratic",
// "random_linear" (seeded tables), "rps".  The initial-distribution sets and
// solver budgets are pinned; dynamics are documented in-repo surrogates.
EnvPreset MakeSurrogate(std::string_view name, std::uint64_t seed,
                        RegularizerSpec::Kind kind =
                            RegularizerSpec::Kind::kEntropy);

// Any built-in by name ("congestion", "sis", or a surrogate).
EnvPreset MakeBuiltin(std::string_view name,
                      RegularizerSpec::Kind kind =
                          RegularizerSpec::Kind::kEntropy,
                      std::uint64_t seed = 0);

const std::vector<std::string>& BuiltinNames();

// Builds a preset from a parsed config document with explicit transition
// and reward tables (see README for the schema).  Validation failures raise
// ConfigError naming the offending entry.
EnvPreset MakeFromConfig(const nlohmann::json& config);

}  // namespace mfrqe

#endif  // MFRQE_ENVS_H_
