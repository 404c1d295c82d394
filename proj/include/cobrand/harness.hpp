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

// Online-offline experiment runs: per season, estimate a graph, allocate the
// budget with GPE, execute, observe, update. Plus budget/cap/tier rules,
// alpha-regret, repetition summaries and K sweeps.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cobrand/config.hpp"
#include "cobrand/environment.hpp"
#include "cobrand/errors.hpp"
#include "cobrand/graph.hpp"
#include "cobrand/learner.hpp"
#include "cobrand/optimizer.hpp"
#include "cobrand/random.hpp"

namespace cobrand {

// Approximation ratio delivered by GPE with K >= 3; used as alpha in regret.
inline const double kAlpha = 1.0 - std::exp(-1.0);

struct BudgetRuleResult {
  Budget total_budget = 0;
  std::vector<Budget> caps;
  std::vector<std::vector<Budget>> plans;
};

// {floor(k c / n) : k = 1..n} without non-positive or repeated levels.
inline std::vector<Budget> tier_levels(Budget cap, int tiers) {
  std::vector<Budget> out;
  for (int k = 1; k <= tiers; ++k) {
    const Budget s = (cap * k) / tiers;
    if (s > 0 && (out.empty() || s > out.back())) out.push_back(s);
  }
  return out;
}

// B0 = round(revenue / 100), B = 10 B0, c_u = round(share_u * multiplier * B),
// N_u = tier levels of c_u.
inline BudgetRuleResult derive_budget_rule(const HistoryDataset& history,
                                           double cap_multiplier = 2.0, int tiers = 3) {
  if (!(history.total_revenue > 0.0)) {
    throw InfeasibleInstance("zero total revenue in history; cannot derive a budget");
  }
  BudgetRuleResult r;
  const Budget b0 = std::llround(history.total_revenue / 100.0);
  r.total_budget = 10 * b0;
  const int U = history.grid.num_initiators;
  for (int u = 0; u < U; ++u) {
    const double share = history.initiator_revenue[u] / history.total_revenue;
    const Budget c = std::llround(share * cap_multiplier * static_cast<double>(r.total_budget));
    r.caps.push_back(c);
    r.plans.push_back(tier_levels(c, tiers));
  }
  return r;
}

// Per-round reward, cumulative reward and alpha-regret for one (policy, rep).
struct RunResult {
  std::string policy;
  int rep = 0;
  std::uint64_t seed = 0;
  std::vector<double> reward;           // realized R per round
  std::vector<double> expected_reward;  // r_truth(b_t) per round
  std::vector<double> cum_reward;
  std::optional<std::vector<double>> alpha_regret;
  std::optional<double> optimum;  // r_truth(b*) when the oracle ran
  double learn_ms = 0.0;
  double optimize_ms = 0.0;
  double sample_ms = 0.0;
};

// Reg(t) = alpha * t * r_opt - sum_{tau <= t} reward_tau.
inline std::vector<double> alpha_regret(std::span<const double> rewards, double r_opt,
                                        double alpha = kAlpha) {
  std::vector<double> out(rewards.size());
  double cum = 0.0;
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    cum += rewards[i];
    out[i] = alpha * static_cast<double>(i + 1) * r_opt - cum;
  }
  return out;
}

inline std::vector<double> prefix_sums(std::span<const double> x) {
  std::vector<double> out(x.size());
  double c = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = c += x[i];
  return out;
}

// Everything a run needs about the world for one repetition.
struct Instance {
  EnvironmentSpec spec;  // empty affinities for graph-file sources
  CoBrandingGraph truth;
  Budget total_budget = kUnboundedBudget;
  GainNoise gain_noise = GainNoise::kBernoulli;
  HistoryDataset history;
};

namespace detail {

inline std::vector<Budget> broadcast(const std::vector<Budget>& v, int U, const char* what) {
  if (static_cast<int>(v.size()) == U) return v;
  if (v.size() == 1) return std::vector<Budget>(U, v.front());
  throw ConfigError(std::string(what) + " must have 1 or U entries");
}

inline std::vector<std::vector<Budget>> broadcast_rows(const std::vector<std::vector<Budget>>& v,
                                                      int U, const char* what) {
  if (static_cast<int>(v.size()) == U) return v;
  if (v.size() == 1) return std::vector<std::vector<Budget>>(U, v.front());
  throw ConfigError(std::string(what) + " must have 1 or U rows");
}

inline PlanGrid explicit_grid(const BudgetConfig& b, int U, int V) {
  PlanGrid g{U, V, {}, {}};
  if (b.caps.empty()) {
    if (b.plans.empty()) throw ConfigError("budget needs caps or plans");
    g.plans = broadcast_rows(b.plans, U, "budget.plans");
    for (const auto& p : g.plans) g.caps.push_back(p.empty() ? 0 : p.back());
  } else {
    g.caps = broadcast(b.caps, U, "budget.caps");
    if (b.plans.empty()) {
      for (Budget c : g.caps) g.plans.push_back(tier_levels(c, b.tiers));
    } else {
      g.plans = broadcast_rows(b.plans, U, "budget.plans");
    }
  }
  auto bad = g.violations();
  if (!bad.empty()) throw ConfigError("budget grid: " + bad.front());
  return g;
}

}  // namespace detail

// One environment per experiment: repetitions share the truth (index 0) and
// differ in logged history and online randomness. Other indices give
// independent synthetic environments, used by the K sweep.
inline EnvironmentSpec environment_spec(const ExperimentConfig& cfg, int index = 0) {
  const auto& e = cfg.environment;
  EnvironmentSpec spec;
  if (e.source == EnvironmentSource::kSynthetic) {
    spec = gen_synthetic_spec(e.num_initiators, e.num_targets,
                              derive_seed(cfg.seed, index, "environment"), e.beta, e.g_cap);
  } else if (e.source == EnvironmentSource::kDataset) {
    spec = load_counts_dataset(e.dataset, e.g_cap, e.beta);
    spec.seed = derive_seed(cfg.seed, index, "environment");
  } else {
    throw ConfigError("environment spec requested for a graph-file source");
  }
  spec.gain_noise = e.gain_noise;
  return spec;
}

// Builds truth, budget and logged history for repetition `rep`. The
// history rule first logs a pilot history on the pilot grid, derives
// (B, caps, plans) from its revenue, then logs the warm-start history on
// the derived grid.
inline Instance build_instance(const ExperimentConfig& cfg, int rep,
                               std::optional<int> history_seasons = std::nullopt,
                               int environment_index = 0) {
  Instance inst;
  inst.gain_noise = cfg.environment.gain_noise;
  const int D = history_seasons.value_or(cfg.history_seasons);
  if (cfg.environment.source == EnvironmentSource::kGraph) {
    inst.truth = graph_from_json(read_json_file(cfg.environment.graph));
    if (cfg.budget.rule != BudgetRule::kExplicit) {
      throw ConfigError("graph-file environments need an explicit budget");
    }
    inst.total_budget = cfg.budget.total_budget.value_or(kUnboundedBudget);
  } else {
    inst.spec = environment_spec(cfg, environment_index);
    const int U = inst.spec.num_initiators, V = inst.spec.num_targets;
    if (cfg.budget.rule == BudgetRule::kExplicit) {
      inst.truth = truth_graph(inst.spec, detail::explicit_grid(cfg.budget, U, V));
      inst.total_budget = cfg.budget.total_budget.value_or(kUnboundedBudget);
    } else {
      BudgetConfig pilot;
      pilot.caps = cfg.budget.pilot_caps;
      pilot.plans = cfg.budget.pilot_plans;
      const auto pilot_truth = truth_graph(inst.spec, detail::explicit_grid(pilot, U, V));
      Rng prng(derive_seed(cfg.seed, rep, "pilot"));
      const auto pilot_history =
          gen_history(pilot_truth, inst.gain_noise, cfg.budget.pilot_seasons,
                      cfg.budget.pilot_budget.value_or(kUnboundedBudget), prng);
      const auto rule = derive_budget_rule(pilot_history, cfg.budget.cap_multiplier, cfg.budget.tiers);
      PlanGrid grid{U, V, rule.plans, rule.caps};
      inst.truth = truth_graph(inst.spec, grid);
      inst.total_budget = rule.total_budget;
    }
  }
  Rng hrng(derive_seed(cfg.seed, rep, "history"));
  inst.history = gen_history(inst.truth, inst.gain_noise, D, inst.total_budget, hrng);
  return inst;
}

// Rejects budgets that cannot fund any sub-brand at any plan level.
inline void check_feasible(const PlanGrid& grid, Budget total_budget) {
  for (int u = 0; u < grid.num_initiators; ++u) {
    for (Budget s : grid.plans[u]) {
      if (s <= grid.caps[u] && s <= total_budget) return;
    }
  }
  throw InfeasibleInstance("total budget " + std::to_string(total_budget) +
                           " is below every plan level");
}

struct RunParams {
  int horizon = 2000;
  int K = 3;
  double epsilon = 0.1;
};

struct RunOutcome {
  RunResult result;
  LearnerState state;
};

inline double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

// One policy on one instance for `params.horizon` seasons.
inline RunOutcome run_policy(const Instance& inst, Policy policy, const RunParams& params,
                             std::uint64_t seed, std::optional<double> r_opt = std::nullopt,
                             int rep = 0) {
  check_feasible(inst.truth.grid(), inst.total_budget);
  const double g_cap = inst.truth.g_cap();
  RunOutcome out{RunResult{}, init_from_history(inst.history, inst.truth.grid(), policy)};
  auto& res = out.result;
  auto& state = out.state;
  res.policy = to_string(policy);
  res.rep = rep;
  res.seed = seed;
  res.reward.reserve(params.horizon);
  res.expected_reward.reserve(params.horizon);
  Rng rng(seed);
  for (std::int64_t t = 1; t <= params.horizon; ++t) {
    auto t0 = std::chrono::steady_clock::now();
    BudgetAllocation alloc;
    if (policy == Policy::kEPS) {
      alloc = eps_greedy_decide(state, params.epsilon, inst.total_budget, params.K, rng, g_cap).allocation;
      res.optimize_ms += elapsed_ms(t0);
    } else {
      const auto graph = policy == Policy::kCBOL ? ucb_graph(state, t, g_cap)
                                                 : baseline_graph(state, t, g_cap, rng);
      auto t1 = std::chrono::steady_clock::now();
      res.learn_ms += std::chrono::duration<double, std::milli>(t1 - t0).count();
      alloc = gpe(graph, inst.total_budget, params.K).allocation;
      res.optimize_ms += elapsed_ms(t1);
    }
    auto t2 = std::chrono::steady_clock::now();
    const auto fb = sample_round(inst.truth, action_set(inst.truth, alloc), inst.gain_noise, rng);
    res.reward.push_back(fb.realized_reward);
    res.expected_reward.push_back(expected_reward(inst.truth, alloc));
    res.sample_ms += elapsed_ms(t2);
    auto t3 = std::chrono::steady_clock::now();
    update(state, fb);
    res.learn_ms += elapsed_ms(t3);
  }
  res.cum_reward = prefix_sums(res.reward);
  if (r_opt) {
    res.optimum = r_opt;
    res.alpha_regret = alpha_regret(res.expected_reward, *r_opt);
  }
  return out;
}

// All (rep, policy) runs of an experiment, sorted by (policy, rep).
inline std::vector<RunResult> run_online(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<RunResult> results;
  const RunParams params{cfg.horizon, cfg.K, cfg.epsilon};
  for (int rep = 0; rep < cfg.reps; ++rep) {
    const Instance inst = build_instance(cfg, rep);
    check_feasible(inst.truth.grid(), inst.total_budget);
    std::optional<double> r_opt;
    if (cfg.oracle && candidate_count(inst.truth.grid()) <= cfg.oracle_limit) {
      r_opt = brute_force_opt(inst.truth, inst.total_budget, cfg.oracle_limit).expected_reward;
    }
    for (Policy p : cfg.policies) {
      const auto seed = derive_seed(cfg.seed, rep, "policy:" + to_string(p));
      results.push_back(run_policy(inst, p, params, seed, r_opt, rep).result);
    }
  }
  std::stable_sort(results.begin(), results.end(), [](const RunResult& a, const RunResult& b) {
    return a.policy != b.policy ? a.policy < b.policy : a.rep < b.rep;
  });
  return results;
}

struct SummaryRow {
  std::string policy;
  int round = 0;
  double mean = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

struct MeanCi {
  double mean = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

// Mean and 95% normal-approximation interval mean ± 1.96 sd / sqrt(n),
// sd with the n-1 denominator (0 for n = 1). Sums run on values shifted by
// the first element so identical inputs give an exact zero-width interval.
inline MeanCi mean_ci(std::span<const double> xs) {
  if (xs.empty()) return {};
  const double n = static_cast<double>(xs.size());
  const double x0 = xs.front();
  double s = 0.0;
  for (double x : xs) s += x - x0;
  const double m = x0 + s / n;
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  const double sd = xs.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  const double h = 1.96 * sd / std::sqrt(n);
  return {m, m - h, m + h};
}

// Cumulative reward per policy and round across repetitions.
inline std::vector<SummaryRow> aggregate_runs(const std::vector<RunResult>& results) {
  std::map<std::string, std::vector<const RunResult*>> by_policy;
  for (const auto& r : results) by_policy[r.policy].push_back(&r);
  std::vector<SummaryRow> out;
  for (const auto& [policy, runs] : by_policy) {
    std::size_t rounds = runs.front()->cum_reward.size();
    for (const auto* r : runs) rounds = std::min(rounds, r->cum_reward.size());
    std::vector<double> xs(runs.size());
    for (std::size_t t = 0; t < rounds; ++t) {
      for (std::size_t i = 0; i < runs.size(); ++i) xs[i] = runs[i]->cum_reward[t];
      const auto ci = mean_ci(xs);
      out.push_back({policy, static_cast<int>(t + 1), ci.mean, ci.lo, ci.hi});
    }
  }
  return out;
}

struct KSweepRow {
  int K = 0;
  double mean_reward = 0.0;
  double mean_runtime_ms = 0.0;
};

struct OfflineInstance {
  CoBrandingGraph graph;
  Budget total_budget = 0;
};

// GPE for each K on the same instances; rows sorted by K.
inline std::vector<KSweepRow> sweep_k(const std::vector<OfflineInstance>& instances,
                                      std::vector<int> ks) {
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  std::vector<KSweepRow> rows;
  for (int k : ks) {
    if (k < 0) throw PreconditionError("K must be >= 0");
    KSweepRow row{k, 0.0, 0.0};
    for (const auto& inst : instances) {
      const auto res = gpe(inst.graph, inst.total_budget, k);
      row.mean_reward += res.expected_reward;
      row.mean_runtime_ms += res.elapsed_ms;
    }
    if (!instances.empty()) {
      row.mean_reward /= static_cast<double>(instances.size());
      row.mean_runtime_ms /= static_cast<double>(instances.size());
    }
    rows.push_back(row);
  }
  return rows;
}

// Instances for the K sweep: one independent environment per repetition for
// synthetic sources, the single configured world otherwise.
inline std::vector<OfflineInstance> sweep_instances(const ExperimentConfig& cfg) {
  cfg.validate();
  const int n = cfg.environment.source == EnvironmentSource::kSynthetic ? cfg.reps : 1;
  std::vector<OfflineInstance> out;
  for (int i = 0; i < n; ++i) {
    Instance inst = build_instance(cfg, i, 0, i);
    check_feasible(inst.truth.grid(), inst.total_budget);
    out.push_back({std::move(inst.truth), inst.total_budget});
  }
  return out;
}

struct OfflineRow {
  Budget total_budget = 0;
  double gpe = 0.0;
  double gbo = 0.0;
  double prop_s = 0.0;
  double prop_w = 0.0;
};

// GPE against GBO, PROP-S and PROP-W on one graph across budgets.
inline std::vector<OfflineRow> compare_offline(const CoBrandingGraph& graph,
                                               const std::vector<Budget>& budgets, int K = 3) {
  std::vector<OfflineRow> rows;
  for (Budget B : budgets) {
    OfflineRow r;
    r.total_budget = B;
    r.gpe = gpe(graph, B, K).expected_reward;
    r.gbo = expected_reward(graph, gbo(graph, B));
    r.prop_s = expected_reward(graph, proportional_alloc(graph, B, ProportionalMode::kUniform));
    r.prop_w = expected_reward(graph, proportional_alloc(graph, B, ProportionalMode::kWeighted));
    rows.push_back(r);
  }
  return rows;
}

// 12 significant digits.
inline std::string fmt12(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

inline std::string results_csv(const std::vector<RunResult>& results) {
  std::string out = "policy,rep,round,reward,cum_reward,alpha_regret,seed\n";
  for (const auto& r : results) {
    for (std::size_t t = 0; t < r.reward.size(); ++t) {
      out += r.policy + "," + std::to_string(r.rep) + "," + std::to_string(t + 1) + "," +
             fmt12(r.reward[t]) + "," + fmt12(r.cum_reward[t]) + "," +
             (r.alpha_regret ? fmt12((*r.alpha_regret)[t]) : std::string("NA")) + "," +
             std::to_string(r.seed) + "\n";
    }
  }
  return out;
}

inline std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::string out = "policy,round,mean,ci_lo,ci_hi\n";
  for (const auto& r : rows) {
    out += r.policy + "," + std::to_string(r.round) + "," + fmt12(r.mean) + "," + fmt12(r.ci_lo) +
           "," + fmt12(r.ci_hi) + "\n";
  }
  return out;
}

inline std::string ksweep_csv(const std::vector<KSweepRow>& rows) {
  std::string out = "K,mean_reward,mean_runtime_ms\n";
  for (const auto& r : rows) {
    out += std::to_string(r.K) + "," + fmt12(r.mean_reward) + "," + fmt12(r.mean_runtime_ms) + "\n";
  }
  return out;
}

}  // namespace cobrand
