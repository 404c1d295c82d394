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

// Online estimation of the co-branding graph.
//
// CBOL keeps per-arm (count, mean, population variance) for every
// ((u,v), s) and every target gain, and hands the optimizer a graph of
// Bernstein upper confidence bounds, monotonized in s by a running maximum.
// EMP, epsilon-greedy, Thompson sampling and CUCB baselines share the same
// tables.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "cobrand/environment.hpp"
#include "cobrand/errors.hpp"
#include "cobrand/graph.hpp"
#include "cobrand/graph_io.hpp"
#include "cobrand/optimizer.hpp"
#include "cobrand/random.hpp"
#include "cobrand/stats.hpp"

namespace cobrand {

enum class Policy { kCBOL, kEMP, kEPS, kTS, kCUCB };

inline std::string to_string(Policy p) {
  switch (p) {
    case Policy::kCBOL: return "CBOL";
    case Policy::kEMP: return "EMP";
    case Policy::kEPS: return "EPS";
    case Policy::kTS: return "TS";
    case Policy::kCUCB: return "CUCB";
  }
  return "?";
}

// Case-insensitive.
inline Policy policy_from_string(const std::string& name) {
  std::string s = name;
  for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (s == "CBOL") return Policy::kCBOL;
  if (s == "EMP") return Policy::kEMP;
  if (s == "EPS" || s == "EPS-GREEDY" || s == "EPSILON") return Policy::kEPS;
  if (s == "TS") return Policy::kTS;
  if (s == "CUCB") return Policy::kCUCB;
  throw MalformedInput("unknown policy '" + name + "'");
}

using ArmStats = RunningStats;
using GainStats = RunningStats;

struct LearnerState {
  PlanGrid grid;
  Policy policy = Policy::kCBOL;
  std::int64_t round = 0;
  std::vector<std::vector<ArmStats>> arms;  // [u][level * V + v]
  std::vector<GainStats> gains;
  // Beta pseudo-counts for Thompson sampling, same layout as `arms`.
  std::vector<std::vector<double>> ts_success;
  std::vector<std::vector<double>> ts_failure;

  static LearnerState fresh(const PlanGrid& grid, Policy policy) {
    LearnerState s;
    s.grid = grid;
    s.policy = policy;
    s.arms.resize(grid.num_initiators);
    s.ts_success.resize(grid.num_initiators);
    s.ts_failure.resize(grid.num_initiators);
    for (int u = 0; u < grid.num_initiators; ++u) {
      const std::size_t n = static_cast<std::size_t>(grid.num_levels(u)) * grid.num_targets;
      s.arms[u].resize(n);
      if (policy == Policy::kTS) {
        s.ts_success[u].assign(n, 1.0);
        s.ts_failure[u].assign(n, 1.0);
      }
    }
    s.gains.resize(grid.num_targets);
    return s;
  }

  std::size_t slot(int level, int v) const {
    return static_cast<std::size_t>(level) * grid.num_targets + v;
  }
  const ArmStats& arm(int u, int level, int v) const { return arms[u][slot(level, v)]; }
  ArmStats& arm(int u, int level, int v) { return arms[u][slot(level, v)]; }
};

// Warm start with every logged arm collapsed to one pull at its historical
// mean (zero variance), so confidence radii only shrink with online data.
inline LearnerState init_from_history(const HistoryDataset& history, const PlanGrid& grid,
                                      Policy policy) {
  if (!history.grid.same_shape(grid)) throw MalformedInput("history shape does not match plan grid");
  LearnerState s = LearnerState::fresh(grid, policy);
  for (int u = 0; u < grid.num_initiators; ++u) {
    for (std::size_t i = 0; i < s.arms[u].size(); ++i) {
      const auto& h = history.arm_stats[u][i];
      if (h.count <= 0) continue;
      s.arms[u][i] = ArmStats{1, h.mean, 0.0};
      if (policy == Policy::kTS) {
        s.ts_success[u][i] += h.mean;
        s.ts_failure[u][i] += 1.0 - h.mean;
      }
    }
  }
  for (int v = 0; v < grid.num_targets; ++v) {
    const auto& h = history.gain_stats[v];
    if (h.count > 0) s.gains[v] = GainStats{1, h.mean, 0.0};
  }
  return s;
}

// sqrt(6 V log_t / T) + 9 log_t / T; +inf for T == 0.
inline double bernstein_width(double variance, double count, double log_t) {
  if (count <= 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(6.0 * variance * log_t / count) + 9.0 * log_t / count;
}

// sqrt(3 log_t / (2 T)); +inf for T == 0.
inline double hoeffding_width(double count, double log_t) {
  if (count <= 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(3.0 * log_t / (2.0 * count));
}

inline double log_round(std::int64_t t) {
  return std::log(static_cast<double>(std::max<std::int64_t>(t, 1)));
}

// Radii at round t (natural log).
inline double bernstein_radius(double variance, std::int64_t count, std::int64_t t) {
  return bernstein_width(variance, static_cast<double>(count), log_round(t));
}

inline double hoeffding_radius(std::int64_t count, std::int64_t t) {
  return hoeffding_width(static_cast<double>(count), log_round(t));
}

namespace detail {

inline double clip(double x, double lo, double hi) { return std::min(hi, std::max(lo, x)); }

// Builds a graph from per-arm and per-gain estimators; mu is replaced by
// its running maximum over plan levels so it never decreases with spend.
template <class ArmValue, class GainValue>
CoBrandingGraph estimate_graph(const LearnerState& s, double g_cap, ArmValue&& arm_value,
                               GainValue&& gain_value) {
  CoBrandingGraph g(s.grid, g_cap);
  for (int u = 0; u < s.grid.num_initiators; ++u) {
    for (int v = 0; v < s.grid.num_targets; ++v) {
      double running = 0.0;
      for (int l = 0; l < s.grid.num_levels(u); ++l) {
        running = std::max(running, clip(arm_value(u, l, v), 0.0, 1.0));
        g.set_mu_at(u, l, v, running);
      }
    }
  }
  for (int v = 0; v < s.grid.num_targets; ++v) {
    g.set_gain(v, clip(gain_value(v), 0.0, g_cap));
  }
  return g;
}

}  // namespace detail

inline CoBrandingGraph ucb_graph(const LearnerState& s, std::int64_t t, double g_cap = 1.0) {
  if (s.policy != Policy::kCBOL) throw PreconditionError("ucb_graph requires the CBOL policy");
  return detail::estimate_graph(
      s, g_cap,
      [&](int u, int l, int v) {
        const auto& a = s.arm(u, l, v);
        return a.visited() ? a.mean + bernstein_radius(a.var, a.count, t) : 1.0;
      },
      [&](int v) {
        const auto& gs = s.gains[v];
        return gs.visited() ? gs.mean + bernstein_radius(gs.var, gs.count, t) : g_cap;
      });
}

// Plain empirical means; unvisited arms and targets stay optimistic.
inline CoBrandingGraph empirical_graph(const LearnerState& s, double g_cap = 1.0) {
  return detail::estimate_graph(
      s, g_cap,
      [&](int u, int l, int v) {
        const auto& a = s.arm(u, l, v);
        return a.visited() ? a.mean : 1.0;
      },
      [&](int v) { return s.gains[v].visited() ? s.gains[v].mean : g_cap; });
}

inline CoBrandingGraph baseline_graph(const LearnerState& s, std::int64_t t, double g_cap,
                                      Rng& rng) {
  switch (s.policy) {
    case Policy::kEMP:
      return empirical_graph(s, g_cap);
    case Policy::kTS:
      return detail::estimate_graph(
          s, g_cap,
          [&](int u, int l, int v) {
            const std::size_t i = s.slot(l, v);
            return sample_beta(rng, s.ts_success[u][i], s.ts_failure[u][i]);
          },
          [&](int v) { return s.gains[v].visited() ? s.gains[v].mean : g_cap; });
    case Policy::kCUCB:
      return detail::estimate_graph(
          s, g_cap,
          [&](int u, int l, int v) {
            const auto& a = s.arm(u, l, v);
            return a.visited() ? a.mean + hoeffding_radius(a.count, t) : 1.0;
          },
          [&](int v) {
            const auto& gs = s.gains[v];
            return gs.visited() ? gs.mean + hoeffding_radius(gs.count, t) : g_cap;
          });
    default:
      throw PreconditionError("baseline_graph does not handle policy " + to_string(s.policy));
  }
}

inline void update(LearnerState& s, const FeedbackRecord& fb) {
  for (const auto& e : fb.edge_outcomes) {
    if (e.u < 0 || e.u >= s.grid.num_initiators || e.v < 0 || e.v >= s.grid.num_targets) {
      throw MalformedInput("feedback for unknown arm");
    }
    auto l = s.grid.level_index(e.u, e.s);
    if (!l || *l == kUnfunded) throw MalformedInput("feedback for unknown arm (spend off grid)");
    const std::size_t i = s.slot(*l, e.v);
    s.arms[e.u][i].push(e.x);
    if (s.policy == Policy::kTS) {
      s.ts_success[e.u][i] += e.x;
      s.ts_failure[e.u][i] += 1 - e.x;
    }
  }
  for (const auto& g : fb.target_gains) {
    if (g.v < 0 || g.v >= s.grid.num_targets) throw MalformedInput("gain feedback for unknown target");
    s.gains[g.v].push(g.y);
  }
  ++s.round;
}

struct EpsDecision {
  BudgetAllocation allocation;
  bool explored = false;
};

// With probability eps a uniformly random feasible allocation, otherwise
// GPE on the empirical graph.
inline EpsDecision eps_greedy_decide(const LearnerState& s, double eps, Budget total_budget, int K,
                                     Rng& rng, double g_cap = 1.0) {
  if (!(eps >= 0.0 && eps <= 1.0)) throw PreconditionError("epsilon must lie in [0,1]");
  if (uniform01(rng) < eps) {
    return {FeasibleAllocationSampler(s.grid, total_budget).sample(rng), true};
  }
  return {gpe(empirical_graph(s, g_cap), total_budget, K).allocation, false};
}

inline Json learner_to_json(const LearnerState& s) {
  Json j = grid_to_json(s.grid);
  j["kind"] = "learner";
  j["policy"] = to_string(s.policy);
  j["round"] = s.round;
  Json arms = Json::array();
  Json ts = Json::array();
  for (int u = 0; u < s.grid.num_initiators; ++u) {
    for (int l = 0; l < s.grid.num_levels(u); ++l) {
      for (int v = 0; v < s.grid.num_targets; ++v) {
        const auto& a = s.arm(u, l, v);
        const Budget lvl = s.grid.plans[u][l];
        if (a.visited()) {
          arms.push_back({{"u", u}, {"v", v}, {"s", lvl}, {"T", a.count}, {"mean", a.mean},
                          {"var", a.var}});
        }
        if (s.policy == Policy::kTS) {
          const std::size_t i = s.slot(l, v);
          ts.push_back({{"u", u}, {"v", v}, {"s", lvl}, {"alpha", s.ts_success[u][i]},
                        {"beta", s.ts_failure[u][i]}});
        }
      }
    }
  }
  j["arms"] = std::move(arms);
  Json gains = Json::array();
  for (int v = 0; v < s.grid.num_targets; ++v) {
    const auto& g = s.gains[v];
    if (g.visited()) gains.push_back({{"v", v}, {"T", g.count}, {"mean", g.mean}, {"var", g.var}});
  }
  j["gains"] = std::move(gains);
  if (s.policy == Policy::kTS) j["ts"] = std::move(ts);
  return j;
}

inline LearnerState learner_from_json(const Json& j) {
  try {
    if (j.value("kind", std::string("learner")) != "learner") {
      throw MalformedInput("expected a learner snapshot");
    }
    LearnerState s =
        LearnerState::fresh(grid_from_json(j), policy_from_string(j.at("policy").get<std::string>()));
    s.round = j.at("round").get<std::int64_t>();
    auto locate = [&](const Json& rec) {
      const int u = rec.at("u").get<int>();
      const int v = rec.at("v").get<int>();
      if (u < 0 || u >= s.grid.num_initiators || v < 0 || v >= s.grid.num_targets) {
        throw MalformedInput("snapshot arm index out of range");
      }
      auto l = s.grid.level_index(u, rec.at("s").get<Budget>());
      if (!l || *l == kUnfunded) throw MalformedInput("snapshot arm spend off the plan grid");
      return std::pair{u, s.slot(*l, v)};
    };
    for (const auto& rec : j.at("arms")) {
      auto [u, i] = locate(rec);
      s.arms[u][i] = ArmStats{rec.at("T").get<std::int64_t>(), rec.at("mean").get<double>(),
                              rec.at("var").get<double>()};
    }
    for (const auto& rec : j.at("gains")) {
      const int v = rec.at("v").get<int>();
      if (v < 0 || v >= s.grid.num_targets) throw MalformedInput("snapshot gain index out of range");
      s.gains[v] = GainStats{rec.at("T").get<std::int64_t>(), rec.at("mean").get<double>(),
                             rec.at("var").get<double>()};
    }
    if (s.policy == Policy::kTS && j.contains("ts")) {
      for (const auto& rec : j.at("ts")) {
        auto [u, i] = locate(rec);
        s.ts_success[u][i] = rec.at("alpha").get<double>();
        s.ts_failure[u][i] = rec.at("beta").get<double>();
      }
    }
    return s;
  } catch (const Json::exception& e) {
    throw MalformedInput(std::string("learner snapshot: ") + e.what());
  }
}

}  // namespace cobrand
