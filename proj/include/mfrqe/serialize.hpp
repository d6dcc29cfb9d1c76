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

#ifndef MFRQE_SERIALIZE_H_
#define MFRQE_SERIALIZE_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mfrqe/game.hpp"
#include "mfrqe/population.hpp"
#include "mfrqe/solvers.hpp"

namespace mfrqe {

// Structured-text codecs.  Every encoder emits explicit shape fields and a
// format_version; doubles round-trip losslessly (shortest-representation
// printing).  Decoders validate shapes and distributions and throw
// ContractError naming the offending field.

nlohmann::json PolicyToJson(const Policy& policy);
Policy PolicyFromJson(const nlohmann::json& j);

nlohmann::json FlowToJson(const MeanFieldFlow& flow);
MeanFieldFlow FlowFromJson(const nlohmann::json& j);

nlohmann::json FlowSetToJson(const FlowSet& flows);
FlowSet FlowSetFromJson(const nlohmann::json& j);

nlohmann::json InitialSetToJson(const InitialSet& initials);
InitialSet InitialSetFromJson(const nlohmann::json& j);

nlohmann::json ReportToJson(const SolveReport& report);
SolveReport ReportFromJson(const nlohmann::json& j);

// File helpers.  Reads throw ConfigError when the file is missing or not
// valid structured text.
void WriteJsonFile(const std::string& path, const nlohmann::json& j);
nlohmann::json ReadJsonFile(const std::string& path);

// Shortest decimal form that parses back to the same double ('.' decimal
// point, locale-independent).
std::string FormatDouble(double value);

// CSV exports.  All writers emit a leading '#' provenance comment carrying
// the artifact version, preset fingerprint and seed, then a header row;
// fields use '.' decimals, ',' separators and LF line endings.

// Per-iteration solver trace: iteration,exploitability,policy_delta.
void WriteTraceCsv(const std::string& path, const SolveReport& report);

// One row of a policy-comparison table.
struct CompareRow {
  std::string policy;
  double exploitability = 0.0;
  bool has_returns = false;  // false leaves the return columns empty
  double mean_return = 0.0;
  double std_error = 0.0;
};

// policy,exploitability,mean_return,stderr.
void WriteCompareCsv(const std::string& path,
                     const std::vector<CompareRow>& rows,
                     const std::string& fingerprint, std::uint64_t seed);

// One row of a population-scaling experiment.
struct GapScalingRow {
  int n_agents = 0;
  double mean_gap = 0.0;  // prior-weighted mean over initials and time
  double max_gap = 0.0;   // max over (initial, t)
};

// n_agents,mean_gap,max_gap with the fitted log-log slope in the comment.
void WriteGapCsv(const std::string& path,
                 const std::vector<GapScalingRow>& rows, double slope,
                 const std::string& fingerprint, std::uint64_t seed);

// episode,t,agent,state,action,reward; terminal states appear with empty
// action/reward cells.
void WriteTrajectoryCsv(const std::string& path,
                        const PopulationTrajectory& traj, int episode,
                        const std::string& fingerprint);

// Least-squares slope of log(y) against log(x); the scaling exponent of a
// power law.  Requires at least two distinct positive points.
double FitLogLogSlope(std::span<const double> x, std::span<const double> y);

}  // namespace mfrqe

#endif  // MFRQE_SERIALIZE_H_
