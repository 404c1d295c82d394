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

// Reference implementations used as test oracles. They share no code with
// the library beyond the CoBrandingGraph accessors: rewards are recomputed
// from the definition, allocations are enumerated with a mixed-radix
// counter, statistics are two-pass batch formulas.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "cobrand/graph.hpp"

namespace oracle {

using cobrand::Budget;
using cobrand::CoBrandingGraph;
using cobrand::PlanGrid;

// sum_v g_v (1 - prod_{u : b_u > 0} (1 - mu_{(u,v),b_u})).
inline double reward(const CoBrandingGraph& g, const std::vector<Budget>& b) {
  double r = 0.0;
  for (int v = 0; v < g.num_targets(); ++v) {
    double miss = 1.0;
    for (int u = 0; u < g.num_initiators(); ++u) {
      if (b[u] > 0) miss *= 1.0 - g.mu(u, v, b[u]);
    }
    r += g.gain(v) * (1.0 - miss);
  }
  return r;
}

inline bool feasible(const PlanGrid& grid, const std::vector<Budget>& b, Budget B) {
  Budget sum = 0;
  for (int u = 0; u < grid.num_initiators; ++u) {
    if (b[u] < 0 || b[u] > grid.caps[u]) return false;
    if (b[u] > 0) {
      bool on = false;
      for (Budget s : grid.plans[u]) on = on || s == b[u];
      if (!on) return false;
    }
    sum += b[u];
  }
  return sum <= B;
}

// Every vector in prod_u ({0} ∪ N_u), in mixed-radix order, filtered by
// feasibility.
inline std::vector<std::vector<Budget>> all_feasible(const PlanGrid& grid, Budget B) {
  const int U = grid.num_initiators;
  std::vector<std::size_t> digit(U, 0);
  std::vector<std::vector<Budget>> out;
  while (true) {
    std::vector<Budget> b(U);
    for (int u = 0; u < U; ++u) b[u] = digit[u] == 0 ? 0 : grid.plans[u][digit[u] - 1];
    if (feasible(grid, b, B)) out.push_back(b);
    int u = 0;
    while (u < U && ++digit[u] > grid.plans[u].size()) digit[u++] = 0;
    if (u == U) break;
  }
  return out;
}

inline int funded(const std::vector<Budget>& b) {
  int n = 0;
  for (Budget x : b) n += x > 0;
  return n;
}

inline std::int64_t count_seeds(const PlanGrid& grid, Budget B, int K) {
  std::int64_t n = 0;
  for (const auto& b : all_feasible(grid, B)) n += funded(b) <= K;
  return n;
}

inline double best_reward(const CoBrandingGraph& g, Budget B) {
  double best = 0.0;
  for (const auto& b : all_feasible(g.grid(), B)) best = std::max(best, reward(g, b));
  return best;
}

inline double mean(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

inline double population_variance(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  const double m = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(xs.size());
}

// Random grid: U sub-brands, up to `max_levels` strictly increasing levels
// drawn from 1..max_level, cap = top level.
inline PlanGrid random_grid(std::mt19937_64& rng, int U, int V, int max_levels, int max_level) {
  PlanGrid grid{U, V, {}, {}};
  std::uniform_int_distribution<int> nlev(1, max_levels);
  for (int u = 0; u < U; ++u) {
    std::vector<Budget> pool;
    for (int s = 1; s <= max_level; ++s) pool.push_back(s);
    std::shuffle(pool.begin(), pool.end(), rng);
    std::vector<Budget> p(pool.begin(), pool.begin() + std::min<int>(nlev(rng), max_level));
    std::sort(p.begin(), p.end());
    grid.plans.push_back(p);
    grid.caps.push_back(p.back());
  }
  return grid;
}

// Random graph on `grid`; mu non-decreasing in s when `monotone`.
inline CoBrandingGraph random_graph(std::mt19937_64& rng, const PlanGrid& grid, bool monotone = true,
                                    double g_cap = 1.0) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  CoBrandingGraph g(grid, g_cap);
  for (int v = 0; v < grid.num_targets; ++v) g.set_gain(v, g_cap * unit(rng));
  for (int u = 0; u < grid.num_initiators; ++u) {
    for (int v = 0; v < grid.num_targets; ++v) {
      std::vector<double> p(grid.plans[u].size());
      for (auto& x : p) x = unit(rng);
      if (monotone) std::sort(p.begin(), p.end());
      for (std::size_t l = 0; l < p.size(); ++l) g.set_mu_at(u, static_cast<int>(l), v, p[l]);
    }
  }
  return g;
}

}  // namespace oracle
