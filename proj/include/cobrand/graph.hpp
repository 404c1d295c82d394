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

// Bipartite co-branding model: sub-brands (initiators) u, target brands v,
// per-sub-brand spend plans, success probabilities mu_{(u,v),s} and target
// market gains g_v. Also the expected-reward objective and its incremental
// marginal gains.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cobrand/errors.hpp"
#include "cobrand/random.hpp"

namespace cobrand {

using Budget = std::int64_t;

inline constexpr Budget kUnboundedBudget = std::numeric_limits<Budget>::max() / 4;

// Index of "no plan level" (the sub-brand is not funded).
inline constexpr int kUnfunded = -1;

// Shape shared by environment truths, learner estimates and histories.
struct PlanGrid {
  int num_initiators = 0;
  int num_targets = 0;
  std::vector<std::vector<Budget>> plans;  // strictly increasing, positive
  std::vector<Budget> caps;

  int num_levels(int u) const { return static_cast<int>(plans[u].size()); }

  // Position of spend `s` in N_u, or kUnfunded for s == 0. Returns nullopt
  // for spends that are not on the grid.
  std::optional<int> level_index(int u, Budget s) const {
    if (s == 0) return kUnfunded;
    const auto& p = plans[u];
    auto it = std::lower_bound(p.begin(), p.end(), s);
    if (it == p.end() || *it != s) return std::nullopt;
    return static_cast<int>(it - p.begin());
  }

  Budget level_value(int u, int idx) const {
    return idx == kUnfunded ? 0 : plans[u][idx];
  }

  // Largest plan level of u not above its cap, or kUnfunded.
  int top_level(int u) const {
    int best = kUnfunded;
    for (int i = 0; i < num_levels(u); ++i) {
      if (plans[u][i] <= caps[u]) best = i;
    }
    return best;
  }

  bool same_shape(const PlanGrid& o) const {
    return num_initiators == o.num_initiators && num_targets == o.num_targets &&
           plans == o.plans && caps == o.caps;
  }

  // Grid invariants: positive, strictly increasing, within caps.
  std::vector<std::string> violations() const {
    std::vector<std::string> out;
    if (num_initiators < 0 || num_targets < 0) out.push_back("negative dimensions");
    if (static_cast<int>(plans.size()) != num_initiators ||
        static_cast<int>(caps.size()) != num_initiators) {
      out.push_back("plans/caps length differs from num_initiators");
      return out;
    }
    for (int u = 0; u < num_initiators; ++u) {
      const auto& p = plans[u];
      for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0) out.push_back("plan level of u=" + std::to_string(u) + " not positive");
        if (p[i] > caps[u]) out.push_back("plan level of u=" + std::to_string(u) + " exceeds cap");
        if (i > 0 && p[i] <= p[i - 1]) {
          out.push_back("plans of u=" + std::to_string(u) + " not strictly increasing");
        }
      }
    }
    return out;
  }
};

class CoBrandingGraph {
 public:
  CoBrandingGraph() = default;

  // All mu entries start undefined (NaN), gains at zero.
  CoBrandingGraph(PlanGrid grid, double g_cap = 1.0) : grid_(std::move(grid)), g_cap_(g_cap) {
    gains_.assign(grid_.num_targets, 0.0);
    mu_.resize(grid_.num_initiators);
    for (int u = 0; u < grid_.num_initiators; ++u) {
      mu_[u].assign(static_cast<std::size_t>(grid_.num_levels(u)) * grid_.num_targets,
                    std::numeric_limits<double>::quiet_NaN());
    }
  }

  const PlanGrid& grid() const { return grid_; }
  int num_initiators() const { return grid_.num_initiators; }
  int num_targets() const { return grid_.num_targets; }
  const std::vector<Budget>& plans(int u) const { return grid_.plans[u]; }
  Budget cap(int u) const { return grid_.caps[u]; }
  double g_cap() const { return g_cap_; }
  void set_g_cap(double g) { g_cap_ = g; }

  std::span<const double> gains() const { return gains_; }
  double gain(int v) const { return gains_[v]; }
  void set_gain(int v, double g) { gains_[v] = g; }

  double mu_at(int u, int level, int v) const {
    return mu_[u][static_cast<std::size_t>(level) * grid_.num_targets + v];
  }
  void set_mu_at(int u, int level, int v, double p) {
    mu_[u][static_cast<std::size_t>(level) * grid_.num_targets + v] = p;
  }

  bool has_mu(int u, int level, int v) const { return !std::isnan(mu_at(u, level, v)); }

  // mu_{(u,v),s} for an on-grid spend s > 0.
  double mu(int u, int v, Budget s) const {
    auto idx = grid_.level_index(u, s);
    if (!idx || *idx == kUnfunded) {
      throw PreconditionError("spend " + std::to_string(s) + " is not a plan level of u=" +
                              std::to_string(u));
    }
    const double p = mu_at(u, *idx, v);
    if (std::isnan(p)) {
      throw IncompleteGraph("missing mu for (u=" + std::to_string(u) + ", v=" +
                            std::to_string(v) + ", s=" + std::to_string(s) + ")");
    }
    return p;
  }

  // True when mu is non-decreasing in s for every (u,v) with defined entries.
  bool is_monotone() const {
    for (int u = 0; u < num_initiators(); ++u) {
      for (int v = 0; v < num_targets(); ++v) {
        double prev = -1.0;
        for (int l = 0; l < grid_.num_levels(u); ++l) {
          const double p = mu_at(u, l, v);
          if (std::isnan(p)) continue;
          if (p < prev) return false;
          prev = p;
        }
      }
    }
    return true;
  }

  // Graph invariants (grid, mu range, gain range). Monotonicity is reported
  // separately through is_monotone() since environment truths may violate it.
  std::vector<std::string> violations() const {
    auto out = grid_.violations();
    if (!out.empty()) return out;
    if (static_cast<int>(gains_.size()) != num_targets()) out.push_back("gains length");
    for (int v = 0; v < static_cast<int>(gains_.size()); ++v) {
      if (!(gains_[v] >= 0.0 && gains_[v] <= g_cap_)) {
        out.push_back("gain of v=" + std::to_string(v) + " outside [0, g_cap]");
      }
    }
    for (int u = 0; u < num_initiators(); ++u) {
      for (double p : mu_[u]) {
        if (!std::isnan(p) && !(p >= 0.0 && p <= 1.0)) {
          out.push_back("mu of u=" + std::to_string(u) + " outside [0,1]");
          break;
        }
      }
    }
    return out;
  }

 private:
  PlanGrid grid_;
  double g_cap_ = 1.0;
  std::vector<double> gains_;
  std::vector<std::vector<double>> mu_;  // [u][level * V + v]
};

struct BudgetAllocation {
  std::vector<Budget> b;
  Budget total_budget = kUnboundedBudget;

  Budget spent() const { return std::accumulate(b.begin(), b.end(), Budget{0}); }
  int funded() const {
    return static_cast<int>(std::count_if(b.begin(), b.end(), [](Budget x) { return x > 0; }));
  }
  friend bool operator==(const BudgetAllocation&, const BudgetAllocation&) = default;
};

struct Violation {
  std::string constraint;  // "plan", "cap", "negative", "total"
  int index = -1;          // sub-brand index, -1 for the total-budget constraint
  std::string message;
};

inline std::vector<Violation> validate_allocation(const PlanGrid& grid,
                                                  const BudgetAllocation& alloc) {
  if (static_cast<int>(alloc.b.size()) != grid.num_initiators) {
    throw MalformedInput("allocation length " + std::to_string(alloc.b.size()) +
                         " does not match U=" + std::to_string(grid.num_initiators));
  }
  std::vector<Violation> out;
  for (int u = 0; u < grid.num_initiators; ++u) {
    const Budget x = alloc.b[u];
    const std::string bu = "b_" + std::to_string(u + 1);
    if (x < 0) {
      out.push_back({"negative", u, bu + " < 0"});
      continue;
    }
    if (!grid.level_index(u, x)) {
      out.push_back({"plan", u, bu + " ∉ N_" + std::to_string(u + 1)});
    }
    if (x > grid.caps[u]) out.push_back({"cap", u, bu + " > c_" + std::to_string(u + 1)});
  }
  if (alloc.spent() > alloc.total_budget) out.push_back({"total", -1, "Σb > B"});
  return out;
}

inline std::vector<Violation> validate_allocation(const CoBrandingGraph& graph,
                                                  const BudgetAllocation& alloc) {
  return validate_allocation(graph.grid(), alloc);
}

inline bool is_feasible(const PlanGrid& grid, const BudgetAllocation& alloc) {
  return validate_allocation(grid, alloc).empty();
}

struct Action {
  int u = 0;
  int v = 0;
  Budget s = 0;
  friend bool operator==(const Action&, const Action&) = default;
};

// Every funded sub-brand attempts every target at its allocated level.
using ActionSet = std::vector<Action>;

inline ActionSet action_set(const PlanGrid& grid, const BudgetAllocation& alloc) {
  auto bad = validate_allocation(grid, alloc);
  if (!bad.empty()) throw PreconditionError("invalid allocation: " + bad.front().message);
  ActionSet out;
  for (int u = 0; u < grid.num_initiators; ++u) {
    if (alloc.b[u] <= 0) continue;
    for (int v = 0; v < grid.num_targets; ++v) out.push_back({u, v, alloc.b[u]});
  }
  return out;
}

inline ActionSet action_set(const CoBrandingGraph& graph, const BudgetAllocation& alloc) {
  return action_set(graph.grid(), alloc);
}

namespace detail {

inline std::vector<int> level_indices(const PlanGrid& grid, std::span<const Budget> b) {
  if (static_cast<int>(b.size()) != grid.num_initiators) {
    throw MalformedInput("allocation length does not match U");
  }
  std::vector<int> idx(b.size());
  for (int u = 0; u < grid.num_initiators; ++u) {
    auto l = grid.level_index(u, b[u]);
    if (!l) {
      throw PreconditionError("b_" + std::to_string(u) + "=" + std::to_string(b[u]) +
                              " is not on the plan grid");
    }
    idx[u] = *l;
  }
  return idx;
}

inline double checked_mu(const CoBrandingGraph& g, int u, int level, int v) {
  const double p = g.mu_at(u, level, v);
  if (std::isnan(p)) {
    throw IncompleteGraph("missing mu for (u=" + std::to_string(u) + ", v=" + std::to_string(v) +
                          ", s=" + std::to_string(g.plans(u)[level]) + ")");
  }
  return p;
}

}  // namespace detail

// r(b) = sum_v g_v (1 - prod_{funded u} (1 - mu_{(u,v),b_u})).
inline double expected_reward(const CoBrandingGraph& graph, std::span<const Budget> b) {
  const auto idx = detail::level_indices(graph.grid(), b);
  const int V = graph.num_targets();
  std::vector<double> survive(V, 1.0);
  for (int u = 0; u < graph.num_initiators(); ++u) {
    if (idx[u] == kUnfunded) continue;
    for (int v = 0; v < V; ++v) survive[v] *= 1.0 - detail::checked_mu(graph, u, idx[u], v);
  }
  double r = 0.0;
  for (int v = 0; v < V; ++v) r += graph.gain(v) * (1.0 - survive[v]);
  return r;
}

inline double expected_reward(const CoBrandingGraph& graph, const BudgetAllocation& alloc) {
  return expected_reward(graph, std::span<const Budget>(alloc.b));
}

// Per-target survival products prod_u (1 - mu) for a current allocation,
// kept as (product of non-zero factors, number of zero factors) so that a
// single sub-brand's factor can be taken out in O(1) even when mu == 1.
class CoverageState {
 public:
  CoverageState(const CoBrandingGraph& graph, std::span<const Budget> b)
      : graph_(&graph), level_(detail::level_indices(graph.grid(), b)), b_(b.begin(), b.end()) {
    const int V = graph.num_targets();
    nonzero_.assign(V, 1.0);
    zeros_.assign(V, 0);
    for (int u = 0; u < graph.num_initiators(); ++u) {
      if (level_[u] == kUnfunded) continue;
      for (int v = 0; v < V; ++v) multiply(v, 1.0 - detail::checked_mu(graph, u, level_[u], v));
    }
  }

  explicit CoverageState(const CoBrandingGraph& graph)
      : CoverageState(graph, std::vector<Budget>(graph.num_initiators(), 0)) {}

  const std::vector<Budget>& allocation() const { return b_; }
  int level(int u) const { return level_[u]; }

  double reward() const {
    double r = 0.0;
    for (int v = 0; v < graph_->num_targets(); ++v) {
      const double s = zeros_[v] > 0 ? 0.0 : nonzero_[v];
      r += graph_->gain(v) * (1.0 - s);
    }
    return r;
  }

  // r(b with u moved to plan level `to`) - r(b), in O(V).
  double gain(int u, int to) const {
    const int from = level_[u];
    const int V = graph_->num_targets();
    double d = 0.0;
    for (int v = 0; v < V; ++v) {
      const double mu_old = from == kUnfunded ? 0.0 : graph_->mu_at(u, from, v);
      const double mu_new = to == kUnfunded ? 0.0 : detail::checked_mu(*graph_, u, to, v);
      if (mu_new == mu_old) continue;
      d += graph_->gain(v) * others(v, 1.0 - mu_old) * (mu_new - mu_old);
    }
    return d;
  }

  // Moves u to plan level `to`, in O(V).
  void apply(int u, int to) {
    const int from = level_[u];
    const int V = graph_->num_targets();
    for (int v = 0; v < V; ++v) {
      if (from != kUnfunded) divide(v, 1.0 - graph_->mu_at(u, from, v));
      if (to != kUnfunded) multiply(v, 1.0 - detail::checked_mu(*graph_, u, to, v));
    }
    level_[u] = to;
    b_[u] = graph_->grid().level_value(u, to);
  }

 private:
  // Product over funded sub-brands other than the one contributing `own`.
  double others(int v, double own) const {
    if (own == 0.0) return zeros_[v] == 1 ? nonzero_[v] : 0.0;
    return zeros_[v] > 0 ? 0.0 : nonzero_[v] / own;
  }
  void multiply(int v, double f) {
    if (f == 0.0) {
      ++zeros_[v];
    } else {
      nonzero_[v] *= f;
    }
  }
  void divide(int v, double f) {
    if (f == 0.0) {
      --zeros_[v];
    } else {
      nonzero_[v] /= f;
    }
  }

  const CoBrandingGraph* graph_;
  std::vector<int> level_;
  std::vector<Budget> b_;
  std::vector<double> nonzero_;
  std::vector<int> zeros_;
};

// Per-unit marginal gain (r(b + s chi_u) - r(b)) / s.
inline double marginal_gain(const CoBrandingGraph& graph, const BudgetAllocation& alloc, int u,
                            Budget s) {
  if (s < 1) throw PreconditionError("increment must be >= 1");
  if (u < 0 || u >= graph.num_initiators()) throw PreconditionError("sub-brand index out of range");
  const Budget target = alloc.b.at(u) + s;
  auto to = graph.grid().level_index(u, target);
  if (!to || target > graph.cap(u)) {
    throw PreconditionError("increment " + std::to_string(s) + " moves u=" + std::to_string(u) +
                            " off the plan grid");
  }
  CoverageState state(graph, alloc.b);
  return state.gain(u, *to) / static_cast<double>(s);
}

// Result of the sampled lattice checks for monotonicity and diminishing returns.
struct DiminishingReturnsReport {
  bool passed = true;
  bool monotone = true;
  bool diminishing_returns = true;
  int checks = 0;
  double min_slack = std::numeric_limits<double>::infinity();
  std::optional<std::string> counterexample;
};

namespace detail {

inline std::string describe(std::span<const Budget> x) {
  std::string s = "(";
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(x[i]);
  }
  return s + ")";
}

}  // namespace detail

// Samples lattice points on the plan grid (ignoring caps and the total
// budget) and checks, with chi-steps moving one coordinate to its next plan
// level:
//   r(x + step_i) - r(x) >= r(x + step_j + step_i) - r(x + step_j),  i != j
//   r(x) <= r(y) for x <= y.
// A failing check is reported, not thrown.
inline DiminishingReturnsReport check_diminishing_returns(const CoBrandingGraph& graph,
                                                          int samples, std::uint64_t seed,
                                                          double tolerance = 1e-12) {
  DiminishingReturnsReport rep;
  const int U = graph.num_initiators();
  const auto& grid = graph.grid();
  Rng rng(seed);
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto to_budget = [&](const std::vector<int>& idx) {
    std::vector<Budget> b(U);
    for (int u = 0; u < U; ++u) b[u] = grid.level_value(u, idx[u]);
    return b;
  };
  auto record = [&](double slack, bool is_monotone_check, const std::string& what) {
    ++rep.checks;
    rep.min_slack = std::min(rep.min_slack, slack);
    if (slack < -tolerance) {
      rep.passed = false;
      (is_monotone_check ? rep.monotone : rep.diminishing_returns) = false;
      if (!rep.counterexample) rep.counterexample = what;
    }
  };

  for (int n = 0; n < samples; ++n) {
    std::vector<int> x(U);
    for (int u = 0; u < U; ++u) x[u] = pick(kUnfunded, grid.num_levels(u) - 1);

    // Monotonicity: y >= x coordinate-wise; one sample in eight uses y == x.
    std::vector<int> y = x;
    if (pick(0, 7) != 0) {
      for (int u = 0; u < U; ++u) y[u] = pick(x[u], grid.num_levels(u) - 1);
    }
    const auto bx = to_budget(x);
    const auto by = to_budget(y);
    const double rx = expected_reward(graph, bx);
    const double ry = expected_reward(graph, by);
    record(ry - rx, true, "monotonicity: r" + detail::describe(bx) + " > r" + detail::describe(by));

    // Exchange condition on two distinct coordinates that can both step up.
    std::vector<int> open;
    for (int u = 0; u < U; ++u) {
      if (x[u] + 1 < grid.num_levels(u)) open.push_back(u);
    }
    if (open.size() < 2) continue;
    const int a = pick(0, static_cast<int>(open.size()) - 1);
    int c = pick(0, static_cast<int>(open.size()) - 2);
    if (c >= a) ++c;
    const int i = open[a], j = open[c];
    auto xi = x, xj = x, xij = x;
    ++xi[i];
    ++xj[j];
    ++xij[i];
    ++xij[j];
    const double lhs = expected_reward(graph, to_budget(xi)) - rx;
    const double rhs = expected_reward(graph, to_budget(xij)) - expected_reward(graph, to_budget(xj));
    record(lhs - rhs, false,
           "diminishing returns at x=" + detail::describe(bx) + ", i=" + std::to_string(i) +
               ", j=" + std::to_string(j));
  }
  return rep;
}

}  // namespace cobrand
