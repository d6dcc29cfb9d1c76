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

#include "mfrqe/serialize.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace mfrqe {
namespace {

using nlohmann::json;

constexpr int kFormatVersion = 1;

void CheckType(const json& j, const char* expected) {
  if (!j.is_object()) {
    throw ContractError(std::string("serialize: expected a '") + expected +
                        "' object");
  }
  if (!j.contains("type") || !j.at("type").is_string() ||
      j.at("type").get<std::string>() != expected) {
    throw ContractError(std::string("serialize: field 'type' must be '") +
                        expected + "'");
  }
  if (!j.contains("format_version") ||
      !j.at("format_version").is_number_integer()) {
    throw ContractError("serialize: missing integer field 'format_version'");
  }
  const int v = j.at("format_version").get<int>();
  if (v != kFormatVersion) {
    throw ContractError("serialize: unsupported format_version " +
                        std::to_string(v));
  }
}

int GetInt(const json& j, const char* field) {
  if (!j.contains(field) || !j.at(field).is_number_integer()) {
    throw ContractError(std::string("serialize: missing integer field '") +
                        field + "'");
  }
  return j.at(field).get<int>();
}

const json& GetArray(const json& j, const char* field) {
  if (!j.contains(field) || !j.at(field).is_array()) {
    throw ContractError(std::string("serialize: missing array field '") +
                        field + "'");
  }
  return j.at(field);
}

std::vector<double> GetNumberVector(const json& v, const std::string& what) {
  if (!v.is_array()) {
    throw ContractError("serialize: " + what + " must be an array");
  }
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) {
      throw ContractError("serialize: " + what + "[" + std::to_string(i) +
                          "] must be a number");
    }
    out.push_back(v[i].get<double>());
  }
  return out;
}

std::ofstream OpenForWrite(const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // binary keeps LF endings
  if (!out) {
    throw ConfigError("cannot open '" + path + "' for writing");
  }
  return out;
}

void CsvComment(std::ofstream& out, const std::string& fingerprint,
                std::uint64_t seed, const std::string& extra = "") {
  out << "# mfrqe " << kVersion << " preset=" << fingerprint
      << " seed=" << seed;
  if (!extra.empty()) out << " " << extra;
  out << "\n";
}

}  // namespace

json PolicyToJson(const Policy& policy) {
  json rows = json::array();
  for (int t = 0; t < policy.horizon(); ++t) {
    json per_state = json::array();
    for (int x = 0; x < policy.n_states(); ++x) {
      const std::span<const double> row = policy.row(t, x);
      per_state.push_back(std::vector<double>(row.begin(), row.end()));
    }
    rows.push_back(std::move(per_state));
  }
  json j;
  j["format_version"] = kFormatVersion;
  j["type"] = "policy";
  j["version"] = kVersion;
  j["horizon"] = policy.horizon();
  j["n_states"] = policy.n_states();
  j["n_actions"] = policy.n_actions();
  j["rows"] = std::move(rows);
  return j;
}

Policy PolicyFromJson(const json& j) {
  CheckType(j, "policy");
  const int T = GetInt(j, "horizon");
  const int X = GetInt(j, "n_states");
  const int U = GetInt(j, "n_actions");
  if (T <= 0 || X <= 0 || U <= 0) {
    throw ContractError("serialize: policy shape fields must be positive");
  }
  const json& rows = GetArray(j, "rows");
  if (rows.size() != static_cast<std::size_t>(T)) {
    throw ContractError("serialize: field 'rows' must have horizon entries");
  }
  Policy policy(T, X, U);
  for (int t = 0; t < T; ++t) {
    const json& per_state = rows[static_cast<std::size_t>(t)];
    if (!per_state.is_array() ||
        per_state.size() != static_cast<std::size_t>(X)) {
      throw ContractError("serialize: rows[" + std::to_string(t) +
                          "] must have n_states entries");
    }
    for (int x = 0; x < X; ++x) {
      const std::string what =
          "rows[" + std::to_string(t) + "][" + std::to_string(x) + "]";
      std::vector<double> row =
          GetNumberVector(per_state[static_cast<std::size_t>(x)], what);
      if (row.size() != static_cast<std::size_t>(U)) {
        throw ContractError("serialize: " + what +
                            " must have n_actions entries");
      }
      policy.SetRow(t, x, {row.data(), row.size()});
    }
  }
  return policy;
}

json FlowToJson(const MeanFieldFlow& flow) {
  json slices = json::array();
  for (int t = 0; t <= flow.horizon(); ++t) {
    const std::span<const double> s = flow.slice(t);
    slices.push_back(std::vector<double>(s.begin(), s.end()));
  }
  json j;
  j["format_version"] = kFormatVersion;
  j["type"] = "flow";
  j["horizon"] = flow.horizon();
  j["n_states"] = flow.n_states();
  j["slices"] = std::move(slices);
  return j;
}

MeanFieldFlow FlowFromJson(const json& j) {
  CheckType(j, "flow");
  const int T = GetInt(j, "horizon");
  const int X = GetInt(j, "n_states");
  if (T <= 0 || X <= 0) {
    throw ContractError("serialize: flow shape fields must be positive");
  }
  const json& slices = GetArray(j, "slices");
  if (slices.size() != static_cast<std::size_t>(T + 1)) {
    throw ContractError(
        "serialize: field 'slices' must have horizon+1 entries");
  }
  MeanFieldFlow flow(T, X);
  for (int t = 0; t <= T; ++t) {
    const std::string what = "slices[" + std::to_string(t) + "]";
    std::vector<double> s =
        GetNumberVector(slices[static_cast<std::size_t>(t)], what);
    if (s.size() != static_cast<std::size_t>(X)) {
      throw ContractError("serialize: " + what + " must have n_states entries");
    }
    ValidateDistribution({s.data(), s.size()}, kProbConstructTol,
                         "serialized " + what);
    std::copy(s.begin(), s.end(), flow.mutable_slice(t).begin());
  }
  return flow;
}

json FlowSetToJson(const FlowSet& flows) {
  json arr = json::array();
  for (const MeanFieldFlow& f : flows.flows) arr.push_back(FlowToJson(f));
  json j;
  j["format_version"] = kFormatVersion;
  j["type"] = "flow_set";
  j["flows"] = std::move(arr);
  return j;
}

FlowSet FlowSetFromJson(const json& j) {
  CheckType(j, "flow_set");
  const json& arr = GetArray(j, "flows");
  FlowSet out;
  out.flows.reserve(arr.size());
  for (const json& f : arr) out.flows.push_back(FlowFromJson(f));
  return out;
}

json InitialSetToJson(const InitialSet& initials) {
  json arr = json::array();
  for (const ProbVector& d : initials.initials) arr.push_back(d.values());
  json j;
  j["format_version"] = kFormatVersion;
  j["type"] = "initial_set";
  j["n_states"] = initials.n_states();
  j["initials"] = std::move(arr);
  j["weights"] = initials.weights.values();
  return j;
}

InitialSet InitialSetFromJson(const json& j) {
  CheckType(j, "initial_set");
  const int X = GetInt(j, "n_states");
  const json& arr = GetArray(j, "initials");
  std::vector<ProbVector> dists;
  dists.reserve(arr.size());
  for (std::size_t k = 0; k < arr.size(); ++k) {
    const std::string what = "initials[" + std::to_string(k) + "]";
    std::vector<double> v = GetNumberVector(arr[k], what);
    if (v.size() != static_cast<std::size_t>(X)) {
      throw ContractError("serialize: " + what + " must have n_states entries");
    }
    dists.emplace_back(std::move(v));
  }
  std::vector<double> w =
      GetNumberVector(GetArray(j, "weights"), "weights");
  return InitialSet(std::move(dists), ProbVector(std::move(w)));
}

json ReportToJson(const SolveReport& report) {
  json j;
  j["format_version"] = kFormatVersion;
  j["type"] = "solve_report";
  j["version"] = kVersion;
  j["final_policy"] = PolicyToJson(report.final_policy);
  j["final_flows"] = FlowSetToJson(report.final_flows);
  j["exploitability_trace"] = report.exploitability_trace;
  j["policy_delta_trace"] = report.policy_delta_trace;
  j["iterations_run"] = report.iterations_run;
  j["wall_time"] = report.wall_time;
  j["seed"] = report.seed;
  j["preset_fingerprint"] = report.preset_fingerprint;
  return j;
}

SolveReport ReportFromJson(const json& j) {
  CheckType(j, "solve_report");
  SolveReport report;
  if (!j.contains("final_policy")) {
    throw ContractError("serialize: missing field 'final_policy'");
  }
  report.final_policy = PolicyFromJson(j.at("final_policy"));
  if (!j.contains("final_flows")) {
    throw ContractError("serialize: missing field 'final_flows'");
  }
  report.final_flows = FlowSetFromJson(j.at("final_flows"));
  report.exploitability_trace = GetNumberVector(
      GetArray(j, "exploitability_trace"), "exploitability_trace");
  report.policy_delta_trace = GetNumberVector(
      GetArray(j, "policy_delta_trace"), "policy_delta_trace");
  report.iterations_run = GetInt(j, "iterations_run");
  if (!j.contains("wall_time") || !j.at("wall_time").is_number()) {
    throw ContractError("serialize: missing number field 'wall_time'");
  }
  report.wall_time = j.at("wall_time").get<double>();
  if (!j.contains("seed") || !j.at("seed").is_number()) {
    throw ContractError("serialize: missing number field 'seed'");
  }
  report.seed = j.at("seed").get<std::uint64_t>();
  if (!j.contains("preset_fingerprint") ||
      !j.at("preset_fingerprint").is_string()) {
    throw ContractError(
        "serialize: missing string field 'preset_fingerprint'");
  }
  report.preset_fingerprint =
      j.at("preset_fingerprint").get<std::string>();
  return report;
}

void WriteJsonFile(const std::string& path, const json& j) {
  std::ofstream out = OpenForWrite(path);
  out << j.dump(2) << "\n";
  if (!out) {
    throw ConfigError("write to '" + path + "' failed");
  }
}

json ReadJsonFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("cannot open '" + path + "'");
  }
  json j = json::parse(in, /*cb=*/nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) {
    throw ConfigError("'" + path + "' is not valid structured text");
  }
  return j;
}

std::string FormatDouble(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

void WriteTraceCsv(const std::string& path, const SolveReport& report) {
  std::ofstream out = OpenForWrite(path);
  CsvComment(out, report.preset_fingerprint, report.seed);
  out << "iteration,exploitability,policy_delta\n";
  for (int i = 0; i < report.iterations_run; ++i) {
    out << i << ","
        << FormatDouble(report.exploitability_trace[static_cast<std::size_t>(i)])
        << ","
        << FormatDouble(report.policy_delta_trace[static_cast<std::size_t>(i)])
        << "\n";
  }
}

void WriteCompareCsv(const std::string& path,
                     const std::vector<CompareRow>& rows,
                     const std::string& fingerprint, std::uint64_t seed) {
  std::ofstream out = OpenForWrite(path);
  CsvComment(out, fingerprint, seed);
  out << "policy,exploitability,mean_return,stderr\n";
  for (const CompareRow& row : rows) {
    out << row.policy << "," << FormatDouble(row.exploitability) << ",";
    if (row.has_returns) {
      out << FormatDouble(row.mean_return) << ","
          << FormatDouble(row.std_error);
    } else {
      out << ",";
    }
    out << "\n";
  }
}

void WriteGapCsv(const std::string& path,
                 const std::vector<GapScalingRow>& rows, double slope,
                 const std::string& fingerprint, std::uint64_t seed) {
  std::ofstream out = OpenForWrite(path);
  CsvComment(out, fingerprint, seed, "loglog_slope=" + FormatDouble(slope));
  out << "n_agents,mean_gap,max_gap\n";
  for (const GapScalingRow& row : rows) {
    out << row.n_agents << "," << FormatDouble(row.mean_gap) << ","
        << FormatDouble(row.max_gap) << "\n";
  }
}

void WriteTrajectoryCsv(const std::string& path,
                        const PopulationTrajectory& traj, int episode,
                        const std::string& fingerprint) {
  std::ofstream out = OpenForWrite(path);
  CsvComment(out, fingerprint, traj.seed);
  out << "episode,t,agent,state,action,reward\n";
  for (int t = 0; t <= traj.horizon; ++t) {
    const bool terminal = t == traj.horizon;
    for (int i = 0; i < traj.n_agents; ++i) {
      out << episode << "," << t << "," << i << ","
          << traj.states_at(t)[static_cast<std::size_t>(i)] << ",";
      if (!terminal) {
        out << traj.actions_at(t)[static_cast<std::size_t>(i)] << ","
            << FormatDouble(traj.rewards_at(t)[static_cast<std::size_t>(i)]);
      } else {
        out << ",";
      }
      out << "\n";
    }
  }
}

double FitLogLogSlope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw ContractError("slope fit needs at least two (x, y) points");
  }
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
      throw ContractError("slope fit requires positive values");
    }
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) {
    throw ContractError("slope fit requires at least two distinct x values");
  }
  return (n * sxy - sx * sy) / denom;
}

}  // namespace mfrqe
