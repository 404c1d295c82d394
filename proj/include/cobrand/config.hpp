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

// Experiment configuration: one JSON document per experiment.
//
// {
//   "schema_version": 1,
//   "environment": {"source": "synthetic" | "dataset" | "graph",
//                   "num_initiators": 10, "num_targets": 60,
//                   "dataset": "counts.csv", "graph": "truth.json",
//                   "beta": 1.0, "gain_noise": "bernoulli", "g_cap": 1.0},
//   "budget":      {"rule": "explicit", "total_budget": 6, "caps": 3,
//                   "plans": [1, 2, 3] | [[...], ...], "tiers": 3}
//               | {"rule": "history", "cap_multiplier": 2, "tiers": 3,
//                   "pilot": {"plans": [1, 2, 3], "caps": 3,
//                             "total_budget": null, "seasons": 50}},
//   "learner":     {"policies": ["CBOL", "EMP", "EPS", "TS", "CUCB"],
//                   "epsilon": 0.1, "history_seasons": 50},
//   "optimizer":   {"K": 3, "K_list": [1, 2, 3, 4, 5]},
//   "harness":     {"T": 2000, "reps": 10, "seed": 1, "oracle": true}
// }
//
// Relative paths resolve against the directory holding the config file.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cobrand/environment.hpp"
#include "cobrand/errors.hpp"
#include "cobrand/graph.hpp"
#include "cobrand/learner.hpp"
#include "cobrand/random.hpp"

namespace cobrand {

inline constexpr int kConfigSchemaVersion = 1;

enum class EnvironmentSource { kSynthetic, kDataset, kGraph };

struct EnvironmentConfig {
  EnvironmentSource source = EnvironmentSource::kSynthetic;
  int num_initiators = 10;
  int num_targets = 60;
  std::string dataset;
  std::string graph;
  double beta = 1.0;
  GainNoise gain_noise = GainNoise::kBernoulli;
  double g_cap = 1.0;
};

enum class BudgetRule { kExplicit, kHistory };

struct BudgetConfig {
  BudgetRule rule = BudgetRule::kExplicit;
  std::optional<Budget> total_budget;  // nullopt: unbounded
  std::vector<Budget> caps;            // one entry broadcasts
  std::vector<std::vector<Budget>> plans;  // one row broadcasts; empty: tiers from caps
  int tiers = 3;
  double cap_multiplier = 2.0;
  // Pilot grid used to log the revenue history that the history rule reads.
  std::vector<Budget> pilot_caps{3};
  std::vector<std::vector<Budget>> pilot_plans{{1, 2, 3}};
  std::optional<Budget> pilot_budget;
  int pilot_seasons = 50;
};

struct ExperimentConfig {
  EnvironmentConfig environment;
  BudgetConfig budget;
  std::vector<Policy> policies{Policy::kCBOL, Policy::kEMP, Policy::kEPS, Policy::kTS,
                               Policy::kCUCB};
  double epsilon = 0.1;
  int history_seasons = 50;
  int K = 3;
  std::vector<int> K_list{1, 2, 3, 4, 5};
  int horizon = 2000;
  int reps = 10;
  std::uint64_t seed = 1;
  bool oracle = true;
  double oracle_limit = 4194304.0;
  std::string hash;  // FNV-1a of the canonical config document

  void validate() const {
    if (horizon < 1) throw ConfigError("harness.T must be >= 1");
    if (reps < 1) throw ConfigError("harness.reps must be >= 1");
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ConfigError("learner.epsilon must lie in [0,1]");
    if (history_seasons < 0) throw ConfigError("learner.history_seasons must be >= 0");
    if (K < 0) throw ConfigError("optimizer.K must be >= 0");
    for (int k : K_list) {
      if (k < 0) throw ConfigError("optimizer.K_list entries must be >= 0");
    }
    if (policies.empty()) throw ConfigError("learner.policies is empty");
    if (environment.g_cap <= 0.0) throw ConfigError("environment.g_cap must be positive");
  }
};

inline std::string hex64(std::uint64_t x) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, x >>= 4) s[i] = digits[x & 0xf];
  return s;
}

namespace detail {

inline std::vector<Budget> budget_list(const Json& j) {
  if (j.is_number_integer()) return {j.get<Budget>()};
  return j.get<std::vector<Budget>>();
}

inline std::vector<std::vector<Budget>> plan_rows(const Json& j) {
  if (j.empty()) return {};
  if (j.at(0).is_array()) return j.get<std::vector<std::vector<Budget>>>();
  return {j.get<std::vector<Budget>>()};
}

inline std::string resolve(const std::string& path, const std::filesystem::path& base) {
  if (path.empty()) return path;
  std::filesystem::path p(path);
  return p.is_absolute() ? path : (base / p).lexically_normal().string();
}

}  // namespace detail

inline ExperimentConfig config_from_json(const Json& j, const std::filesystem::path& base_dir = {}) {
  ExperimentConfig c;
  try {
    const int version = j.value("schema_version", kConfigSchemaVersion);
    if (version != kConfigSchemaVersion) {
      throw ConfigError("unsupported schema_version " + std::to_string(version));
    }
    if (j.contains("environment")) {
      const auto& e = j.at("environment");
      const std::string src = e.value("source", std::string("synthetic"));
      if (src == "synthetic") {
        c.environment.source = EnvironmentSource::kSynthetic;
      } else if (src == "dataset") {
        c.environment.source = EnvironmentSource::kDataset;
      } else if (src == "graph") {
        c.environment.source = EnvironmentSource::kGraph;
      } else {
        throw ConfigError("unknown environment.source '" + src + "'");
      }
      c.environment.num_initiators = e.value("num_initiators", c.environment.num_initiators);
      c.environment.num_targets = e.value("num_targets", c.environment.num_targets);
      c.environment.dataset = detail::resolve(e.value("dataset", std::string()), base_dir);
      c.environment.graph = detail::resolve(e.value("graph", std::string()), base_dir);
      c.environment.beta = e.value("beta", c.environment.beta);
      c.environment.g_cap = e.value("g_cap", c.environment.g_cap);
      c.environment.gain_noise = gain_noise_from_string(e.value("gain_noise", std::string("bernoulli")));
    }
    if (j.contains("budget")) {
      const auto& b = j.at("budget");
      const std::string rule = b.value("rule", std::string("explicit"));
      if (rule == "explicit") {
        c.budget.rule = BudgetRule::kExplicit;
      } else if (rule == "history") {
        c.budget.rule = BudgetRule::kHistory;
      } else {
        throw ConfigError("unknown budget.rule '" + rule + "'");
      }
      if (b.contains("total_budget") && !b.at("total_budget").is_null()) {
        c.budget.total_budget = b.at("total_budget").get<Budget>();
      }
      if (b.contains("caps")) c.budget.caps = detail::budget_list(b.at("caps"));
      if (b.contains("plans")) c.budget.plans = detail::plan_rows(b.at("plans"));
      c.budget.tiers = b.value("tiers", c.budget.tiers);
      c.budget.cap_multiplier = b.value("cap_multiplier", c.budget.cap_multiplier);
      if (b.contains("pilot")) {
        const auto& p = b.at("pilot");
        if (p.contains("caps")) c.budget.pilot_caps = detail::budget_list(p.at("caps"));
        if (p.contains("plans")) c.budget.pilot_plans = detail::plan_rows(p.at("plans"));
        if (p.contains("total_budget") && !p.at("total_budget").is_null()) {
          c.budget.pilot_budget = p.at("total_budget").get<Budget>();
        }
        c.budget.pilot_seasons = p.value("seasons", c.budget.pilot_seasons);
      }
      if (c.budget.tiers < 1) throw ConfigError("budget.tiers must be >= 1");
    }
    if (j.contains("learner")) {
      const auto& l = j.at("learner");
      if (l.contains("policies")) {
        c.policies.clear();
        for (const auto& p : l.at("policies")) c.policies.push_back(policy_from_string(p.get<std::string>()));
      }
      c.epsilon = l.value("epsilon", c.epsilon);
      c.history_seasons = l.value("history_seasons", c.history_seasons);
    }
    if (j.contains("optimizer")) {
      const auto& o = j.at("optimizer");
      c.K = o.value("K", c.K);
      if (o.contains("K_list")) c.K_list = o.at("K_list").get<std::vector<int>>();
    }
    if (j.contains("harness")) {
      const auto& h = j.at("harness");
      c.horizon = h.value("T", c.horizon);
      c.reps = h.value("reps", c.reps);
      c.seed = h.value("seed", c.seed);
      c.oracle = h.value("oracle", c.oracle);
    }
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const MalformedInput& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.oracle_limit = oracle_limit_from_env();
  c.hash = hex64(fnv1a(j.dump()));
  c.validate();
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  Json j;
  try {
    j = read_json_file(path);
  } catch (const LoadError& e) {
    throw ConfigError(e.what());
  }
  return config_from_json(j, std::filesystem::path(path).parent_path());
}

}  // namespace cobrand
