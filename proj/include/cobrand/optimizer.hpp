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

// Offline budget allocation over the plan grid.
//
//   gpe   - partial enumeration over seeds funding at most K sub-brands, each
//           extended by the residual-queue greedy; best extension wins.
//   gbo   - the greedy from the zero allocation only.
//   proportional_alloc - equal (S) or reachable-gain weighted (W) shares,
//           floored onto the plan grid.
//   brute_force_opt - exhaustive scan; exact oracle for small instances.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <utility>
#include <vector>

#include "cobrand/errors.hpp"
#include "cobrand/graph.hpp"
#include "cobrand/graph_io.hpp"

namespace cobrand {

inline constexpr double kDefaultOracleLimit = 4194304.0;  // 2^22 candidates

// Π_u (|N_u ∩ [1, c_u]| + 1); counted in double so large grids do not overflow.
inline double candidate_count(const PlanGrid& grid) {
  double n = 1.0;
  for (int u = 0; u < grid.num_initiators; ++u) n *= grid.top_level(u) + 2;
  return n;
}

// Visits every feasible allocation with at most K funded sub-brands, each
// exactly once: the zero allocation first, then lexicographic in the list of
// (sub-brand, level) pairs sorted by sub-brand. Returns the number visited.
template <class Visitor>
std::int64_t enumerate_seeds(const PlanGrid& grid, Budget total_budget, int K, Visitor&& visit) {
  if (K < 0) throw PreconditionError("K must be >= 0");
  std::vector<Budget> b(grid.num_initiators, 0);
  std::int64_t n = 0;
  auto rec = [&](auto&& self, int next_u, int funded, Budget spent) -> void {
    const BudgetAllocation seed{b, total_budget};
    visit(seed);
    ++n;
    if (funded == K) return;
    for (int u = next_u; u < grid.num_initiators; ++u) {
      for (Budget s : grid.plans[u]) {
        if (s > grid.caps[u] || spent + s > total_budget) break;
        b[u] = s;
        self(self, u + 1, funded + 1, spent + s);
        b[u] = 0;
      }
    }
  };
  rec(rec, 0, 0, 0);
  return n;
}

inline std::vector<BudgetAllocation> enumerate_seeds(const PlanGrid& grid, Budget total_budget,
                                                     int K) {
  std::vector<BudgetAllocation> out;
  enumerate_seeds(grid, total_budget, K, [&](const BudgetAllocation& s) { out.push_back(s); });
  return out;
}

// One pending move: spend `increment` more on sub-brand u, landing on plan
// level `to`.
struct QueueEntry {
  int u = 0;
  Budget increment = 0;
  int to = 0;
};

// Residual increments {s' - b_u : s' in N_u, b_u < s' <= c_u}, ordered by
// sub-brand then increment.
class IncrementQueue {
 public:
  IncrementQueue(const PlanGrid& grid, std::span<const Budget> b) : grid_(&grid) {
    for (int u = 0; u < grid.num_initiators; ++u) {
      for (int l = 0; l < grid.num_levels(u); ++l) {
        const Budget s = grid.plans[u][l];
        if (s > b[u] && s <= grid.caps[u]) entries_.push_back({u, s - b[u], l});
      }
    }
  }

  const std::vector<QueueEntry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

  // u moved up by `spent`: shift u's residuals down and drop the non-positive ones.
  void commit(int u, Budget spent) {
    std::erase_if(entries_, [&](QueueEntry& e) {
      if (e.u != u) return false;
      e.increment -= spent;
      return e.increment <= 0;
    });
  }

  void drop(std::size_t i) { entries_.erase(entries_.begin() + static_cast<std::ptrdiff_t>(i)); }

 private:
  const PlanGrid* grid_;
  std::vector<QueueEntry> entries_;
};

struct NoopObserver {
  void operator()(const std::vector<Budget>&) const {}
};

// Residual-queue greedy from `seed`: repeatedly take the entry with the
// largest per-unit gain (r(b + s chi_u) - r(b)) / s (ties: lowest u, then
// smallest s); commit it if it fits the remaining budget, otherwise drop it.
// `observe` sees the allocation after every commit.
template <class Observer = NoopObserver>
BudgetAllocation greedy_extend(const CoBrandingGraph& graph, const BudgetAllocation& seed,
                               Budget total_budget, Observer&& observe = {}) {
  auto bad = validate_allocation(graph, BudgetAllocation{seed.b, total_budget});
  if (!bad.empty()) throw PreconditionError("infeasible seed: " + bad.front().message);
  CoverageState state(graph, seed.b);
  IncrementQueue queue(graph.grid(), seed.b);
  Budget left = total_budget - seed.spent();
  while (left > 0 && !queue.empty()) {
    const auto& entries = queue.entries();
    std::size_t best = 0;
    double best_gain = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const auto& e = entries[i];
      const double g = state.gain(e.u, e.to) / static_cast<double>(e.increment);
      if (g > best_gain) {
        best_gain = g;
        best = i;
      }
    }
    const QueueEntry e = entries[best];
    if (e.increment <= left) {
      state.apply(e.u, e.to);
      left -= e.increment;
      queue.commit(e.u, e.increment);
      observe(state.allocation());
    } else {
      queue.drop(best);
    }
  }
  return BudgetAllocation{state.allocation(), total_budget};
}

struct OptimizeResult {
  BudgetAllocation allocation;
  double expected_reward = 0.0;
  int K = 0;
  std::int64_t seeds_evaluated = 0;
  double elapsed_ms = 0.0;
};

inline Json to_json(const OptimizeResult& r) {
  return Json{{"allocation", r.allocation.b},
              {"expected_reward", r.expected_reward},
              {"K", r.K},
              {"seeds_evaluated", r.seeds_evaluated},
              {"elapsed_ms", r.elapsed_ms}};
}

inline OptimizeResult gpe(const CoBrandingGraph& graph, Budget total_budget, int K = 3) {
  const auto start = std::chrono::steady_clock::now();
  OptimizeResult best;
  best.K = K;
  best.allocation = BudgetAllocation{std::vector<Budget>(graph.num_initiators(), 0), total_budget};
  best.expected_reward = 0.0;
  best.seeds_evaluated = enumerate_seeds(graph.grid(), total_budget, K,
                                         [&](const BudgetAllocation& seed) {
    auto b = greedy_extend(graph, seed, total_budget);
    const double r = expected_reward(graph, b);
    if (r > best.expected_reward) {
      best.expected_reward = r;
      best.allocation = std::move(b);
    }
  });
  best.elapsed_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return best;
}

inline BudgetAllocation gbo(const CoBrandingGraph& graph, Budget total_budget) {
  return greedy_extend(graph,
                       BudgetAllocation{std::vector<Budget>(graph.num_initiators(), 0), total_budget},
                       total_budget);
}

enum class ProportionalMode { kUniform /* PROP-S */, kWeighted /* PROP-W */ };

// Largest plan level <= min(share, c_u), or 0.
inline Budget floor_to_grid(const PlanGrid& grid, int u, double share) {
  Budget out = 0;
  for (Budget s : grid.plans[u]) {
    if (s <= grid.caps[u] && static_cast<double>(s) <= share) out = s;
  }
  return out;
}

inline BudgetAllocation proportional_alloc(const CoBrandingGraph& graph, Budget total_budget,
                                           ProportionalMode mode) {
  const int U = graph.num_initiators();
  BudgetAllocation out{std::vector<Budget>(U, 0), total_budget};
  if (U == 0) return out;
  std::vector<double> w(U, 1.0);
  if (mode == ProportionalMode::kWeighted) {
    // w_u: gain reachable by u alone at its highest plan level.
    for (int u = 0; u < U; ++u) {
      w[u] = 0.0;
      const int top = graph.grid().num_levels(u) - 1;
      if (top < 0) continue;
      for (int v = 0; v < graph.num_targets(); ++v) {
        w[u] += graph.gain(v) * detail::checked_mu(graph, u, top, v);
      }
    }
  }
  double wsum = 0.0;
  for (double x : w) wsum += x;
  if (wsum <= 0.0) {
    w.assign(U, 1.0);
    wsum = U;
  }
  const double B = static_cast<double>(total_budget);
  for (int u = 0; u < U; ++u) out.b[u] = floor_to_grid(graph.grid(), u, B * w[u] / wsum);
  return out;
}

struct OracleResult {
  BudgetAllocation allocation;
  double expected_reward = 0.0;
  double candidates = 0.0;
};

inline double oracle_limit_from_env() {
  if (const char* s = std::getenv("COBRAND_ORACLE_LIMIT")) {
    char* end = nullptr;
    const double x = std::strtod(s, &end);
    if (end != s && x > 0.0) return x;
  }
  return kDefaultOracleLimit;
}

// Exhaustive scan in lexicographic order of b (ties keep the first optimum).
// Survival products are carried down the search tree, so each node costs O(V).
inline OracleResult brute_force_opt(const CoBrandingGraph& graph, Budget total_budget,
                                    double limit = kDefaultOracleLimit) {
  const auto& grid = graph.grid();
  OracleResult best;
  best.candidates = candidate_count(grid);
  if (best.candidates > limit) throw OracleLimitExceeded(best.candidates, limit);
  const int U = graph.num_initiators();
  const int V = graph.num_targets();
  std::vector<Budget> b(U, 0);
  std::vector<std::vector<double>> survive(U + 1, std::vector<double>(V, 1.0));
  best.allocation = BudgetAllocation{b, total_budget};
  best.expected_reward = -1.0;
  auto rec = [&](auto&& self, int u, Budget spent) -> void {
    if (u == U) {
      double r = 0.0;
      for (int v = 0; v < V; ++v) r += graph.gain(v) * (1.0 - survive[U][v]);
      if (r > best.expected_reward) {
        best.expected_reward = r;
        best.allocation.b = b;
      }
      return;
    }
    b[u] = 0;
    survive[u + 1] = survive[u];
    self(self, u + 1, spent);
    for (int l = 0; l < grid.num_levels(u); ++l) {
      const Budget s = grid.plans[u][l];
      if (s > grid.caps[u] || spent + s > total_budget) break;
      b[u] = s;
      for (int v = 0; v < V; ++v) {
        survive[u + 1][v] = survive[u][v] * (1.0 - detail::checked_mu(graph, u, l, v));
      }
      self(self, u + 1, spent + s);
    }
    b[u] = 0;
  };
  rec(rec, 0, 0);
  best.expected_reward = expected_reward(graph, best.allocation);
  return best;
}

inline Json to_json(const OracleResult& r) {
  return Json{{"allocation", r.allocation.b},
              {"expected_reward", r.expected_reward},
              {"candidates", r.candidates}};
}

}  // namespace cobrand
