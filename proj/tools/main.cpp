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
//
// Command-line front end: solves presets, runs Table-style policy
// comparisons, and measures finite-population approximation error.
//
// Exit codes: 0 success, 2 configuration error, 3 solver/model failure.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mfrqe/envs.hpp"
#include "mfrqe/population.hpp"
#include "mfrqe/serialize.hpp"
#include "mfrqe/solvers.hpp"

namespace {

using mfrqe::EnvPreset;
using nlohmann::json;

// Everything a command needs, merged from defaults, the optional config
// file, and command-line flags (flags win).
struct RunConfig {
  std::string env;
  json inline_env;  // non-null when the config file defines tables inline
  std::string solver = "fpi";
  int single_mfe_index = -1;

  double alpha = 0.0;        // 0 = no override
  double tau = 0.0;          // 0 = no override
  int iterations = 0;        // 0 = preset default
  double beta = 0.0;         // 0 = preset default
  std::string regularizer;   // empty = entropy

  long long episodes = -1;   // -1 = per-command default
  int seeds = -1;            // -1 = per-command default
  std::vector<int> population;
  int n_agents = 100;
  bool use_limit_flow = true;

  int threads = 0;  // 0 = hardware concurrency
  std::uint64_t seed = 0;
  std::string out = "mfrqe_out";
};

struct FlagSet {
  bool env = false, solver = false, alpha = false, tau = false;
  bool iterations = false, beta = false, regularizer = false;
  bool episodes = false, seeds = false, population = false;
  bool threads = false, seed = false, out = false;
};

double GetNumberField(const json& j, const char* key, const std::string& path) {
  if (!j.at(key).is_number()) {
    throw mfrqe::ConfigError("config: entry '" + path + "' must be a number");
  }
  return j.at(key).get<double>();
}

// Applies the config file under the already-parsed flags.
void MergeConfigFile(const std::string& path, const FlagSet& set,
                     RunConfig& cfg) {
  const json file = mfrqe::ReadJsonFile(path);
  if (!file.is_object()) {
    throw mfrqe::ConfigError("config: '" + path + "' must hold an object");
  }
  if (file.contains("environment") && !set.env) {
    const json& env = file.at("environment");
    if (env.is_string()) {
      cfg.env = env.get<std::string>();
    } else if (env.is_object()) {
      cfg.inline_env = env;
    } else {
      throw mfrqe::ConfigError(
          "config: entry 'environment' must be a preset name or an object");
    }
  }
  if (file.contains("solver") && !set.solver) {
    cfg.solver = file.at("solver").get<std::string>();
  }
  if (file.contains("single_mfe_index")) {
    cfg.single_mfe_index = file.at("single_mfe_index").get<int>();
  }
  if (file.contains("overrides")) {
    const json& ov = file.at("overrides");
    if (!ov.is_object()) {
      throw mfrqe::ConfigError("config: entry 'overrides' must be an object");
    }
    if (ov.contains("alpha") && !set.alpha) {
      cfg.alpha = GetNumberField(ov, "alpha", "overrides.alpha");
    }
    if (ov.contains("tau") && !set.tau) {
      cfg.tau = GetNumberField(ov, "tau", "overrides.tau");
    }
    if (ov.contains("iterations") && !set.iterations) {
      cfg.iterations = ov.at("iterations").get<int>();
    }
    if (ov.contains("beta") && !set.beta) {
      cfg.beta = GetNumberField(ov, "beta", "overrides.beta");
    }
    if (ov.contains("regularizer") && !set.regularizer) {
      cfg.regularizer = ov.at("regularizer").get<std::string>();
    }
  }
  if (file.contains("evaluation")) {
    const json& ev = file.at("evaluation");
    if (!ev.is_object()) {
      throw mfrqe::ConfigError("config: entry 'evaluation' must be an object");
    }
    if (ev.contains("episodes") && !set.episodes) {
      cfg.episodes = ev.at("episodes").get<long long>();
    }
    if (ev.contains("seeds") && !set.seeds) {
      cfg.seeds = ev.at("seeds").get<int>();
    }
    if (ev.contains("population_sizes") && !set.population) {
      cfg.population = ev.at("population_sizes").get<std::vector<int>>();
    }
    if (ev.contains("n_agents")) {
      cfg.n_agents = ev.at("n_agents").get<int>();
    }
    if (ev.contains("use_limit_flow")) {
      cfg.use_limit_flow = ev.at("use_limit_flow").get<bool>();
    }
  }
  if (file.contains("output_dir") && !set.out) {
    cfg.out = file.at("output_dir").get<std::string>();
  }
  if (file.contains("seed") && !set.seed) {
    cfg.seed = file.at("seed").get<std::uint64_t>();
  }
  if (file.contains("threads") && !set.threads) {
    cfg.threads = file.at("threads").get<int>();
  }
}

std::string JoinNames(const std::vector<std::string>& names) {
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) out += ", ";
    out += names[i];
  }
  return out;
}

EnvPreset BuildPreset(RunConfig& cfg) {
  mfrqe::RegularizerSpec::Kind kind = mfrqe::RegularizerSpec::Kind::kEntropy;
  if (!cfg.regularizer.empty()) {
    kind = mfrqe::RegularizerSpec::FromName(cfg.regularizer).kind;
  }

  EnvPreset preset;
  if (!cfg.inline_env.is_null()) {
    json env = cfg.inline_env;
    if (!cfg.regularizer.empty()) env["regularizer"] = cfg.regularizer;
    preset = mfrqe::MakeFromConfig(env);
  } else {
    if (cfg.env.empty()) {
      throw mfrqe::ConfigError(
          "no environment selected; pass --env NAME or a config file with an "
          "'environment' entry (valid names: " +
          JoinNames(mfrqe::BuiltinNames()) + ")");
    }
    const auto& names = mfrqe::BuiltinNames();
    if (std::find(names.begin(), names.end(), cfg.env) == names.end()) {
      throw mfrqe::ConfigError("unknown environment '" + cfg.env +
                               "'; valid names: " + JoinNames(names));
    }
    preset = mfrqe::MakeBuiltin(cfg.env, kind, cfg.seed);
  }

  // Apply numeric overrides and record them in the provenance so the
  // fingerprint tracks what actually ran.
  json overrides = json::object();
  if (cfg.alpha != 0.0) {
    if (!(cfg.alpha > 0.0)) {
      throw mfrqe::ConfigError("--alpha must be positive");
    }
    preset.risk.alpha = cfg.alpha;
    overrides["alpha"] = cfg.alpha;
  }
  if (cfg.tau != 0.0) {
    if (!(cfg.tau > 0.0)) {
      throw mfrqe::ConfigError("--tau must be positive");
    }
    preset.risk.tau = cfg.tau;
    overrides["tau"] = cfg.tau;
  }
  if (cfg.iterations != 0) {
    if (cfg.iterations < 0) {
      throw mfrqe::ConfigError("--iterations must be positive");
    }
    preset.fpi_iterations = cfg.iterations;
    overrides["iterations"] = cfg.iterations;
  }
  if (cfg.beta != 0.0) {
    if (!(cfg.beta > 0.0) || !(cfg.beta < 1.0)) {
      throw mfrqe::ConfigError("--beta must lie strictly in (0, 1)");
    }
    preset.fictitious_beta = cfg.beta;
    overrides["beta"] = cfg.beta;
  }
  if (!overrides.empty()) preset.provenance["overrides"] = overrides;
  preset.Validate();
  return preset;
}

mfrqe::SolveOptions MakeSolveOptions(const RunConfig& cfg) {
  mfrqe::SolveOptions opts;
  opts.iterations = cfg.iterations;
  opts.beta = cfg.beta;
  opts.seed = cfg.seed;
  return opts;
}

mfrqe::SolveReport RunSolver(const EnvPreset& preset, const RunConfig& cfg) {
  const mfrqe::SolveOptions opts = MakeSolveOptions(cfg);
  if (cfg.solver == "fpi") return mfrqe::RqFpi(preset, opts);
  if (cfg.solver == "fictitious_play") {
    return mfrqe::RqFictitiousPlay(preset, opts);
  }
  if (cfg.solver == "pi_avg") return mfrqe::SolvePiAvgReport(preset, opts);
  if (cfg.solver == "single_mfe") {
    if (cfg.single_mfe_index < 0) {
      throw mfrqe::ConfigError(
          "solver 'single_mfe' needs 'single_mfe_index' in the config file");
    }
    return mfrqe::SolveSingleMfeReport(preset, cfg.single_mfe_index, opts);
  }
  throw mfrqe::ConfigError(
      "unknown solver '" + cfg.solver +
      "'; valid: fpi, fictitious_play, pi_avg, single_mfe");
}

int ResolveThreads(const RunConfig& cfg) {
  if (cfg.threads > 0) return cfg.threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Adds file-level provenance to an artifact before writing it.
void WriteStamped(const std::filesystem::path& path, json j,
                  const std::string& fingerprint, std::uint64_t seed) {
  j["preset_fingerprint"] = fingerprint;
  j["seed"] = seed;
  j["version"] = mfrqe::kVersion;
  mfrqe::WriteJsonFile(path.string(), j);
}

int CmdSolve(RunConfig& cfg) {
  const EnvPreset preset = BuildPreset(cfg);
  const mfrqe::SolveReport report = RunSolver(preset, cfg);
  const double final_expl =
      mfrqe::Exploitability(report.final_policy, preset);

  const std::filesystem::path out(cfg.out);
  std::filesystem::create_directories(out);
  WriteStamped(out / "report.json", mfrqe::ReportToJson(report),
               report.preset_fingerprint, cfg.seed);
  WriteStamped(out / "policy.json", mfrqe::PolicyToJson(report.final_policy),
               report.preset_fingerprint, cfg.seed);
  WriteStamped(out / "flows.json", mfrqe::FlowSetToJson(report.final_flows),
               report.preset_fingerprint, cfg.seed);
  mfrqe::WriteTraceCsv((out / "trace.csv").string(), report);

  std::cout << "env=" << preset.name << " solver=" << cfg.solver
            << " iterations=" << report.iterations_run
            << " final_exploitability=" << mfrqe::FormatDouble(final_expl)
            << "\n"
            << "wrote " << (out / "report.json").string() << ", policy.json, "
            << "flows.json, trace.csv\n";
  return 0;
}

int CmdCompare(RunConfig& cfg) {
  const EnvPreset preset = BuildPreset(cfg);
  const long long episodes = cfg.episodes < 0 ? 10000 : cfg.episodes;
  const int seeds = cfg.seeds < 0 ? 5 : cfg.seeds;
  const int threads = ResolveThreads(cfg);
  const mfrqe::SolveOptions opts = MakeSolveOptions(cfg);

  struct Entry {
    std::string name;
    mfrqe::Policy policy;
  };
  std::vector<Entry> entries;
  for (int k = 0; k < preset.initials.size(); ++k) {
    entries.push_back({"single_mu0_" + std::to_string(k),
                       mfrqe::SolveSingleMfe(preset, k, opts)});
  }
  entries.push_back({"pi_avg", mfrqe::SolvePiAvg(preset, opts)});
  entries.push_back({"rqe", mfrqe::RqFpi(preset, opts).final_policy});

  std::vector<mfrqe::CompareRow> rows;
  for (const Entry& entry : entries) {
    mfrqe::CompareRow row;
    row.policy = entry.name;
    row.exploitability = mfrqe::Exploitability(entry.policy, preset);
    if (episodes > 0) {
      mfrqe::EvalOptions ev;
      ev.n_episodes = static_cast<int>(episodes);
      ev.n_seeds = seeds;
      ev.use_limit_flow = cfg.use_limit_flow;
      ev.n_agents = cfg.n_agents;
      ev.seed = cfg.seed;
      ev.threads = threads;
      const mfrqe::ReturnStats stats =
          mfrqe::EvaluateReturns(preset, entry.policy, ev);
      row.has_returns = true;
      row.mean_return = stats.mean;
      row.std_error = stats.std_error;
    }
    rows.push_back(row);
  }

  const std::filesystem::path out(cfg.out);
  std::filesystem::create_directories(out);
  const std::string fingerprint = preset.Fingerprint();
  mfrqe::WriteCompareCsv((out / "compare.csv").string(), rows, fingerprint,
                         cfg.seed);

  std::cout << "env=" << preset.name << " policies=" << rows.size()
            << " episodes=" << episodes << " seeds=" << seeds << "\n";
  for (const mfrqe::CompareRow& row : rows) {
    std::cout << "  " << row.policy
              << " exploitability=" << mfrqe::FormatDouble(row.exploitability);
    if (row.has_returns) {
      std::cout << " mean_return=" << mfrqe::FormatDouble(row.mean_return)
                << " stderr=" << mfrqe::FormatDouble(row.std_error);
    }
    std::cout << "\n";
  }
  std::cout << "wrote " << (out / "compare.csv").string() << "\n";
  return 0;
}

int CmdSimulate(RunConfig& cfg) {
  const EnvPreset preset = BuildPreset(cfg);
  std::vector<int> sizes = cfg.population;
  if (sizes.empty()) sizes = {16, 64, 256, 1024};
  std::sort(sizes.begin(), sizes.end());
  const auto dupe = std::unique(sizes.begin(), sizes.end());
  if (dupe != sizes.end()) {
    std::cerr << "warning: duplicate population sizes removed\n";
    sizes.erase(dupe, sizes.end());
  }
  for (int n : sizes) {
    if (n < 1) {
      throw mfrqe::ConfigError("population sizes must be >= 1");
    }
  }

  const mfrqe::SolveReport solved = RunSolver(preset, cfg);
  const int episodes = cfg.episodes < 0 ? 64 : static_cast<int>(cfg.episodes);
  const int threads = ResolveThreads(cfg);

  std::vector<mfrqe::GapScalingRow> rows;
  std::vector<double> ns;
  std::vector<double> gaps;
  for (int n : sizes) {
    mfrqe::GapOptions gopts;
    gopts.n_agents = n;
    gopts.n_episodes = episodes;
    gopts.seed = cfg.seed;
    gopts.threads = threads;
    const mfrqe::GapReport gap = mfrqe::MfGap(preset, solved.final_policy,
                                              gopts);
    mfrqe::GapScalingRow row;
    row.n_agents = n;
    row.mean_gap = mfrqe::PairwiseSum({gap.per_t_mean.data(),
                                       gap.per_t_mean.size()}) /
                   static_cast<double>(gap.per_t_mean.size());
    row.max_gap = gap.max_gap;
    rows.push_back(row);
    ns.push_back(static_cast<double>(n));
    gaps.push_back(row.mean_gap);
  }

  double slope = std::numeric_limits<double>::quiet_NaN();
  if (rows.size() >= 2) {
    slope = mfrqe::FitLogLogSlope({ns.data(), ns.size()},
                                  {gaps.data(), gaps.size()});
  }

  const std::filesystem::path out(cfg.out);
  std::filesystem::create_directories(out);
  mfrqe::WriteGapCsv((out / "gap.csv").string(), rows, slope,
                     preset.Fingerprint(), cfg.seed);

  std::cout << "env=" << preset.name << " episodes_per_size=" << episodes
            << "\n";
  for (const mfrqe::GapScalingRow& row : rows) {
    std::cout << "  n_agents=" << row.n_agents
              << " mean_gap=" << mfrqe::FormatDouble(row.mean_gap)
              << " max_gap=" << mfrqe::FormatDouble(row.max_gap) << "\n";
  }
  std::cout << "loglog_slope=" << mfrqe::FormatDouble(slope) << "\n"
            << "wrote " << (out / "gap.csv").string() << "\n";
  return 0;
}

int CmdExportPreset(RunConfig& cfg) {
  const EnvPreset preset = BuildPreset(cfg);
  json j = preset.provenance;
  j["fingerprint"] = preset.Fingerprint();
  j["state_labels"] = preset.game.state_labels;
  j["action_labels"] = preset.game.action_labels;

  const std::filesystem::path out(cfg.out);
  std::filesystem::create_directories(out);
  mfrqe::WriteJsonFile((out / "preset.json").string(), j);
  std::cout << "env=" << preset.name
            << " fingerprint=" << preset.Fingerprint() << "\n"
            << "wrote " << (out / "preset.json").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Risk-averse quantal response equilibria for finite mean-field games"};
  app.require_subcommand(1);

  RunConfig cfg;
  FlagSet set;
  std::string config_path;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--env", cfg.env, "Environment preset name")
        ->each([&](const std::string&) { set.env = true; });
    cmd->add_option("--config", config_path,
                    "Structured config file (flags win over its entries)");
    cmd->add_option("--solver", cfg.solver,
                    "fpi | fictitious_play | pi_avg | single_mfe")
        ->each([&](const std::string&) { set.solver = true; });
    cmd->add_option("--alpha", cfg.alpha, "Regularization weight override")
        ->each([&](const std::string&) { set.alpha = true; });
    cmd->add_option("--tau", cfg.tau, "Risk temperature override")
        ->each([&](const std::string&) { set.tau = true; });
    cmd->add_option("--iterations", cfg.iterations,
                    "Outer iteration budget override")
        ->each([&](const std::string&) { set.iterations = true; });
    cmd->add_option("--beta", cfg.beta, "Fictitious-play averaging rate")
        ->each([&](const std::string&) { set.beta = true; });
    cmd->add_option("--regularizer", cfg.regularizer,
                    "entropy | log_barrier")
        ->each([&](const std::string&) { set.regularizer = true; });
    cmd->add_option("--episodes", cfg.episodes, "Evaluation episodes")
        ->each([&](const std::string&) { set.episodes = true; });
    cmd->add_option("--seeds", cfg.seeds, "Evaluation seed count")
        ->each([&](const std::string&) { set.seeds = true; });
    cmd->add_option("--population", cfg.population,
                    "Population sizes (comma separated)")
        ->delimiter(',')
        ->each([&](const std::string&) { set.population = true; });
    cmd->add_option("--threads", cfg.threads,
                    "Worker cap (default: hardware concurrency)")
        ->each([&](const std::string&) { set.threads = true; });
    cmd->add_option("--seed", cfg.seed, "Master seed")
        ->each([&](const std::string&) { set.seed = true; });
    cmd->add_option("--out", cfg.out, "Output directory")
        ->each([&](const std::string&) { set.out = true; });
  };

  CLI::App* solve = app.add_subcommand("solve", "Solve one preset");
  CLI::App* compare = app.add_subcommand(
      "compare", "Solve all baseline policies and tabulate them");
  CLI::App* simulate = app.add_subcommand(
      "simulate", "Finite-population approximation error across sizes");
  CLI::App* export_preset = app.add_subcommand(
      "export-preset", "Write a preset's definition and fingerprint");
  for (CLI::App* cmd : {solve, compare, simulate, export_preset}) {
    add_common(cmd);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (!config_path.empty()) MergeConfigFile(config_path, set, cfg);
    if (app.got_subcommand(solve)) return CmdSolve(cfg);
    if (app.got_subcommand(compare)) return CmdCompare(cfg);
    if (app.got_subcommand(simulate)) return CmdSimulate(cfg);
    if (app.got_subcommand(export_preset)) return CmdExportPreset(cfg);
    std::cerr << "error: no subcommand\n";
    return 2;
  } catch (const mfrqe::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const mfrqe::ConvergenceError& e) {
    std::cerr << "error: solver failed to converge: " << e.what() << "\n";
    return 3;
  } catch (const mfrqe::ModelError& e) {
    std::cerr << "error: model evaluation failed: " << e.what() << "\n";
    return 3;
  } catch (const mfrqe::ContractError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: invalid config: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
