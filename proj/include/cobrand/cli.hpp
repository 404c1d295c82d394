// Copyright 2026 The Cobrand Authors.
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


#pragma once

// Command-line front end. Commands: gen-env, gen-history, optimize, oracle,
// run, sweep-k. Exit codes: 0 ok, 1 other error, 2 usage, 3 config or file
// I/O, 4 infeasible instance, 5 oracle limit exceeded.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cobrand/config.hpp"
#include "cobrand/errors.hpp"
#include "cobrand/graph_io.hpp"
#include "cobrand/harness.hpp"
#include "cobrand/optimizer.hpp"

namespace cobrand::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kConfigIo = 3,
  kInfeasible = 4,
  kOracleLimit = 5,
};

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> c{"gen-env", "gen-history", "optimize",
                                          "oracle",  "run",         "sweep-k"};
  return c;
}

inline std::string describe(const std::string& command) {
  static const std::map<std::string, std::string> d{
      {"gen-env", "write the truth environment, graph and budget grid"},
      {"gen-history", "write a logged warm-start history"},
      {"optimize", "run GPE on the truth graph"},
      {"oracle", "exhaustive optimum on the truth graph"},
      {"run", "online simulation: results, summary, manifest"},
      {"sweep-k", "GPE reward and runtime over the K list"},
  };
  return d.at(command);
}

struct CliConfig {
  std::string command;
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> K;
  std::optional<int> T;
  std::optional<int> reps;
  std::vector<std::string> policies;
};

// Raised for anything the parser rejects; carries the usage text.
class UsageError : public Error {
 public:
  UsageError(const std::string& what, std::string usage)
      : Error(what), usage_(std::move(usage)) {}
  const char* kind() const noexcept override { return "usage"; }
  const std::string& usage() const { return usage_; }

 private:
  std::string usage_;
};

// Thrown for --help; not an error.
struct HelpRequested {
  std::string text;
};

inline CliConfig parse_invocation(const std::vector<std::string>& args) {
  CliConfig cfg;
  CLI::App app{"Co-branding budget allocation: simulation, learning and optimization",
               "cobrand"};
  app.require_subcommand(1, 1);
  std::string policies;
  for (const auto& name : commands()) {
    auto* sub = app.add_subcommand(name, describe(name));
    sub->add_option("--config", cfg.config_path, "experiment config (JSON)")->required();
    sub->add_option("--out", cfg.out_dir, "output directory");
    sub->add_option("--seed", cfg.seed, "base seed override");
    sub->add_option("--K", cfg.K, "seed-set size override (sweep-k: replaces the K list)")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--T", cfg.T, "horizon override")->check(CLI::PositiveNumber);
    sub->add_option("--reps", cfg.reps, "repetitions override")->check(CLI::PositiveNumber);
    sub->add_option("--policy", policies, "comma-separated policy filter");
  }
  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested{app.help()};
  } catch (const CLI::CallForAllHelp&) {
    throw HelpRequested{app.help("", CLI::AppFormatMode::All)};
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what(), app.help());
  }
  for (auto* sub : app.get_subcommands()) cfg.command = sub->get_name();
  std::stringstream ss(policies);
  for (std::string p; std::getline(ss, p, ',');) {
    if (!p.empty()) cfg.policies.push_back(p);
  }
  return cfg;
}

inline CliConfig parse_invocation(int argc, const char* const* argv) {
  return parse_invocation(std::vector<std::string>(argv + 1, argv + argc));
}

// The config document with command-line overrides patched in, so the hash
// covers what actually ran.
inline Json effective_config_json(const CliConfig& cli) {
  Json j;
  try {
    j = read_json_file(cli.config_path);
  } catch (const LoadError& e) {
    throw ConfigError(e.what());
  }
  if (!j.is_object()) throw ConfigError("config root must be an object");
  if (cli.seed) j["harness"]["seed"] = *cli.seed;
  if (cli.T) j["harness"]["T"] = *cli.T;
  if (cli.reps) j["harness"]["reps"] = *cli.reps;
  if (cli.K) {
    if (cli.command == "sweep-k") {
      j["optimizer"]["K_list"] = Json::array({*cli.K});
    } else {
      j["optimizer"]["K"] = *cli.K;
    }
  }
  if (!cli.policies.empty()) j["learner"]["policies"] = cli.policies;
  return j;
}

inline ExperimentConfig effective_config(const CliConfig& cli) {
  return config_from_json(effective_config_json(cli),
                          std::filesystem::path(cli.config_path).parent_path());
}

namespace detail {

// Tracks written files so a failed command can remove its partial outputs.
class OutputSet {
 public:
  explicit OutputSet(std::filesystem::path dir) : dir_(std::move(dir)) {}

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  void text(const std::string& name, const std::string& body) {
    std::filesystem::create_directories(dir_);
    const auto p = path(name);
    written_.push_back(p);
    write_text_file(p, body);
  }
  void json(const std::string& name, const Json& j) { text(name, j.dump(2) + "\n"); }

  void remove_all() noexcept {
    for (const auto& p : written_) {
      std::error_code ec;
      std::filesystem::remove(p, ec);
    }
    written_.clear();
  }

  const std::vector<std::string>& written() const { return written_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> written_;
};

inline Json budget_json(const CoBrandingGraph& truth, Budget total_budget) {
  Json j{{"kind", "budget"}, {"plans", truth.grid().plans}, {"caps", truth.grid().caps}};
  j["total_budget"] = total_budget >= kUnboundedBudget ? Json() : Json(total_budget);
  return j;
}

inline Json manifest_json(const ExperimentConfig& cfg, const Json& config_doc,
                          const std::vector<RunResult>& results) {
  Json runs = Json::array();
  for (const auto& r : results) {
    Json row{{"policy", r.policy}, {"rep", r.rep}, {"seed", r.seed}};
    row["optimum"] = r.optimum ? Json(*r.optimum) : Json();
    runs.push_back(std::move(row));
  }
  return Json{{"kind", "manifest"},
              {"config_hash", cfg.hash},
              {"config", config_doc},
              {"files", {"results.csv", "summary.csv"}},
              {"alpha", kAlpha},
              {"oracle_regret", !results.empty() && results.front().optimum.has_value()},
              {"runs", std::move(runs)}};
}

inline std::string join_paths(const std::vector<std::string>& paths) {
  std::string s;
  for (const auto& p : paths) s += (s.empty() ? "" : " ") + p;
  return s;
}

}  // namespace detail

// Runs one parsed command and returns the exit code; errors are reported on
// `err` as "error[<kind>]: <message>".
inline int execute(const CliConfig& cli, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  const auto start = std::chrono::steady_clock::now();
  detail::OutputSet files{std::filesystem::path(cli.out_dir)};
  auto fail = [&](const char* kind, const std::string& what, int code) {
    files.remove_all();
    err << "error[" << kind << "]: " << what << "\n";
    return code;
  };
  try {
    const Json doc = effective_config_json(cli);
    const ExperimentConfig cfg =
        config_from_json(doc, std::filesystem::path(cli.config_path).parent_path());
    const std::string& cmd = cli.command;
    std::string note;
    if (cmd == "gen-env") {
      const Instance inst = build_instance(cfg, 0, 0);
      if (cfg.environment.source != EnvironmentSource::kGraph) {
        files.json("environment.json", spec_to_json(inst.spec));
      }
      files.json("truth_graph.json", graph_to_json(inst.truth));
      files.json("budget.json", detail::budget_json(inst.truth, inst.total_budget));
    } else if (cmd == "gen-history") {
      const Instance inst = build_instance(cfg, 0);
      files.json("history.json", history_to_json(inst.history));
      note = "D=" + std::to_string(inst.history.num_seasons);
    } else if (cmd == "optimize") {
      const Instance inst = build_instance(cfg, 0, 0);
      const auto res = gpe(inst.truth, inst.total_budget, cfg.K);
      files.json("optimize.json", to_json(res));
      note = "reward=" + fmt12(res.expected_reward);
    } else if (cmd == "oracle") {
      const Instance inst = build_instance(cfg, 0, 0);
      const auto res = brute_force_opt(inst.truth, inst.total_budget, cfg.oracle_limit);
      files.json("oracle.json", to_json(res));
      note = "reward=" + fmt12(res.expected_reward);
    } else if (cmd == "run") {
      const auto results = run_online(cfg);
      files.text("results.csv", results_csv(results));
      files.text("summary.csv", summary_csv(aggregate_runs(results)));
      files.json("manifest.json", detail::manifest_json(cfg, doc, results));
      note = "runs=" + std::to_string(results.size());
    } else if (cmd == "sweep-k") {
      const auto rows = sweep_k(sweep_instances(cfg), cfg.K_list);
      files.text("ksweep.csv", ksweep_csv(rows));
      note = "K=" + std::to_string(rows.size()) + " values";
    } else {
      return fail("usage", "unknown command '" + cmd + "'", kUsage);
    }
    char secs[32];
    std::snprintf(secs, sizeof secs, "%.3fs", elapsed_ms(start) / 1000.0);
    out << cmd << ": " << secs << (note.empty() ? "" : " " + note) << " -> "
        << detail::join_paths(files.written()) << "\n";
    return kOk;
  } catch (const ConfigError& e) {
    return fail(e.kind(), e.what(), kConfigIo);
  } catch (const LoadError& e) {
    return fail(e.kind(), e.what(), kConfigIo);
  } catch (const InfeasibleInstance& e) {
    return fail(e.kind(), e.what(), kInfeasible);
  } catch (const OracleLimitExceeded& e) {
    return fail(e.kind(), e.what(), kOracleLimit);
  } catch (const Error& e) {
    return fail(e.kind(), e.what(), kFailure);
  } catch (const std::filesystem::filesystem_error& e) {
    return fail("io", e.what(), kConfigIo);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), kFailure);
  }
}

// parse_invocation + execute with usage handling.
inline int main_entry(int argc, const char* const* argv, std::ostream& out = std::cout,
                      std::ostream& err = std::cerr) {
  CliConfig cli;
  try {
    cli = parse_invocation(argc, argv);
  } catch (const HelpRequested& h) {
    out << h.text;
    return kOk;
  } catch (const UsageError& e) {
    err << "error[usage]: " << e.what() << "\n" << e.usage();
    return kUsage;
  }
  return execute(cli, out, err);
}

}  // namespace cobrand::cli
