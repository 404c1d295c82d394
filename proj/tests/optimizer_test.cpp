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


#include <cmath>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "cobrand/harness.hpp"
#include "cobrand/optimizer.hpp"
#include "oracles.hpp"

namespace cobrand {
namespace {

// U=2, V=1, plans {1}, caps 1, g=1, mu = (0.8, 0.5). Feasible allocations
// under B=1 are (0,0), (1,0), (0,1) with rewards 0, 0.8, 0.5.
CoBrandingGraph two_by_one() {
  CoBrandingGraph g(PlanGrid{2, 1, {{1}, {1}}, {1, 1}});
  g.set_gain(0, 1.0);
  g.set_mu_at(0, 0, 0, 0.8);
  g.set_mu_at(1, 0, 0, 0.5);
  return g;
}

PlanGrid flat_grid(int U, int V, std::vector<Budget> plans, Budget cap) {
  return PlanGrid{U, V, std::vector<std::vector<Budget>>(U, plans), std::vector<Budget>(U, cap)};
}

TEST(EnumerateSeeds, KZeroIsZeroAllocation) {
  auto seeds = enumerate_seeds(flat_grid(4, 1, {1, 2}, 2), 5, 0);
  ASSERT_EQ(seeds.size(), 1u);
  EXPECT_EQ(seeds[0].b, (std::vector<Budget>{0, 0, 0, 0}));
}

TEST(EnumerateSeeds, FullCountOnThreeByThree) {
  auto seeds = enumerate_seeds(flat_grid(3, 1, {1, 2, 3}, 3), kUnboundedBudget, 3);
  EXPECT_EQ(seeds.size(), 64u);
}

TEST(EnumerateSeeds, MatchesRecursiveCounter) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 50; ++i) {
    auto grid = oracle::random_grid(rng, 1 + rng() % 6, 1, 3, 5);
    // Some caps below the top level.
    for (int u = 0; u < grid.num_initiators; ++u)
      if (rng() % 3 == 0) grid.caps[u] = std::max<Budget>(grid.plans[u].front(), grid.caps[u] - 1);
    const Budget B = rng() % 4 == 0 ? kUnboundedBudget : static_cast<Budget>(rng() % 12);
    const int K = static_cast<int>(rng() % 5);
    std::set<std::vector<Budget>> distinct;
    const auto n = enumerate_seeds(grid, B, K, [&](const BudgetAllocation& s) {
      EXPECT_TRUE(is_feasible(grid, BudgetAllocation{s.b, B}));
      EXPECT_LE(s.funded(), K);
      distinct.insert(s.b);
    });
    EXPECT_EQ(n, oracle::count_seeds(grid, B, K));
    EXPECT_EQ(static_cast<std::int64_t>(distinct.size()), n);
  }
}

TEST(EnumerateSeeds, CanonicalOrder) {
  auto seeds = enumerate_seeds(flat_grid(2, 1, {1, 2}, 2), kUnboundedBudget, 2);
  std::vector<std::vector<Budget>> want{{0, 0}, {1, 0}, {1, 1}, {1, 2}, {2, 0},
                                        {2, 1}, {2, 2}, {0, 1}, {0, 2}};
  ASSERT_EQ(seeds.size(), want.size());
  for (std::size_t i = 0; i < want.size(); ++i) EXPECT_EQ(seeds[i].b, want[i]);
}

TEST(GreedyExtend, TwoByOneFixture) {
  auto g = two_by_one();
  auto b = greedy_extend(g, {{0, 0}, 1}, 1);
  EXPECT_EQ(b.b, (std::vector<Budget>{1, 0}));
  EXPECT_DOUBLE_EQ(expected_reward(g, b), 0.8);
}

TEST(GreedyExtend, NoBudgetLeftReturnsSeed) {
  auto g = two_by_one();
  auto b = greedy_extend(g, {{0, 1}, 1}, 1);
  EXPECT_EQ(b.b, (std::vector<Budget>{0, 1}));
}

TEST(GreedyExtend, InfeasibleSeedRejected) {
  EXPECT_THROW(greedy_extend(two_by_one(), {{1, 1}, 1}, 1), PreconditionError);
}

TEST(IncrementQueue, ResidualsAfterCommit) {
  PlanGrid grid{1, 1, {{1, 3}}, {3}};
  IncrementQueue q(grid, std::vector<Budget>{0});
  ASSERT_EQ(q.entries().size(), 2u);
  EXPECT_EQ(q.entries()[0].increment, 1);
  EXPECT_EQ(q.entries()[1].increment, 3);
  q.commit(0, 1);
  ASSERT_EQ(q.entries().size(), 1u);
  EXPECT_EQ(q.entries()[0].increment, 2);
  EXPECT_EQ(grid.plans[0][q.entries()[0].to], 3);
}

TEST(IncrementQueue, RespectsCaps) {
  PlanGrid grid{1, 1, {{1, 2, 3}}, {2}};
  IncrementQueue q(grid, std::vector<Budget>{1});
  ASSERT_EQ(q.entries().size(), 1u);
  EXPECT_EQ(q.entries()[0].increment, 1);
}

TEST(GreedyExtend, TieBreaksLowestSubBrandThenSmallestIncrement) {
  // Identical sub-brands, mu linear in s, so every per-unit gain from zero
  // is equal: the first commit must be (u=0, s=1).
  PlanGrid grid = flat_grid(2, 1, {1, 2}, 2);
  CoBrandingGraph g(grid);
  g.set_gain(0, 1.0);
  for (int u = 0; u < 2; ++u) {
    g.set_mu_at(u, 0, 0, 0.2);
    g.set_mu_at(u, 1, 0, 0.4);
  }
  std::vector<std::vector<Budget>> trace;
  greedy_extend(g, {{0, 0}, 2}, 2, [&](const std::vector<Budget>& b) { trace.push_back(b); });
  ASSERT_EQ(trace.size(), 2u);
  EXPECT_EQ(trace[0], (std::vector<Budget>{1, 0}));
  EXPECT_EQ(trace[1], (std::vector<Budget>{2, 0}));
}

TEST(GreedyExtend, DeterministicAndOnGrid) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 100; ++i) {
    auto grid = oracle::random_grid(rng, 2 + rng() % 5, 1 + rng() % 6, 3, 5);
    auto g = oracle::random_graph(rng, grid);
    const Budget B = 1 + rng() % 12;
    auto seeds = enumerate_seeds(grid, B, 1);
    const auto& seed = seeds[rng() % seeds.size()];
    auto a = greedy_extend(g, seed, B, [&](const std::vector<Budget>& b) {
      EXPECT_TRUE(is_feasible(grid, BudgetAllocation{b, B}));
    });
    EXPECT_EQ(a, greedy_extend(g, seed, B));
    EXPECT_TRUE(is_feasible(grid, a));
    for (int u = 0; u < grid.num_initiators; ++u) EXPECT_GE(a.b[u], seed.b[u]);
  }
}

TEST(Gbo, EqualsGreedyFromZero) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    auto grid = oracle::random_grid(rng, 1 + rng() % 6, 1 + rng() % 6, 3, 5);
    auto g = oracle::random_graph(rng, grid);
    const Budget B = rng() % 15;
    auto a = gbo(g, B);
    EXPECT_EQ(a, greedy_extend(g, {std::vector<Budget>(grid.num_initiators, 0), B}, B));
    EXPECT_TRUE(validate_allocation(g, a).empty());
  }
  EXPECT_EQ(gbo(two_by_one(), 1).b, (std::vector<Budget>{1, 0}));
}

TEST(Gpe, AtLeastGboAndMonotoneInK) {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 100; ++i) {
    auto grid = oracle::random_grid(rng, 2 + rng() % 4, 1 + rng() % 6, 3, 4);
    auto g = oracle::random_graph(rng, grid);
    const Budget B = 1 + rng() % 10;
    const double r_gbo = expected_reward(g, gbo(g, B));
    double prev = -1.0;
    for (int K = 0; K <= 4; ++K) {
      auto res = gpe(g, B, K);
      EXPECT_TRUE(validate_allocation(g, res.allocation).empty());
      EXPECT_GE(res.expected_reward, r_gbo);
      EXPECT_GE(res.expected_reward, prev);
      EXPECT_DOUBLE_EQ(res.expected_reward, expected_reward(g, res.allocation));
      EXPECT_EQ(res.seeds_evaluated, oracle::count_seeds(grid, B, K));
      prev = res.expected_reward;
    }
  }
}

TEST(Gpe, ExactWhenOptimumHasAtMostKFunded) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 100; ++i) {
    auto grid = oracle::random_grid(rng, 3, 1 + rng() % 6, 3, 4);
    auto g = oracle::random_graph(rng, grid);
    const Budget B = 1 + rng() % 12;
    EXPECT_NEAR(gpe(g, B, 3).expected_reward, oracle::best_reward(g, B), 1e-12);
  }
}

TEST(Gpe, ApproximationBoundOnRandomInstances) {
  std::mt19937_64 rng(8);
  const double alpha = 1.0 - std::exp(-1.0);
  for (int i = 0; i < 200; ++i) {
    auto grid = oracle::random_grid(rng, 2 + rng() % 5, 2 + rng() % 9, 3, 5);
    auto g = oracle::random_graph(rng, grid);
    Budget cap_sum = 0;
    for (Budget c : grid.caps) cap_sum += c;
    const Budget B = 1 + rng() % cap_sum;
    const double opt = oracle::best_reward(g, B);
    EXPECT_GE(gpe(g, B, 3).expected_reward, alpha * opt * (1.0 - 1e-9));
  }
}

TEST(Gpe, ZeroKOnAnyGraphIsGbo) {
  auto g = two_by_one();
  auto res = gpe(g, 1, 0);
  EXPECT_EQ(res.seeds_evaluated, 1);
  EXPECT_EQ(res.allocation.b, (std::vector<Budget>{1, 0}));
}

TEST(Proportional, UniformSplitOnGrid) {
  CoBrandingGraph g(flat_grid(3, 1, {1, 2, 3}, 3));
  g.set_gain(0, 1.0);
  for (int u = 0; u < 3; ++u)
    for (int l = 0; l < 3; ++l) g.set_mu_at(u, l, 0, 0.5);
  EXPECT_EQ(proportional_alloc(g, 6, ProportionalMode::kUniform).b, (std::vector<Budget>{2, 2, 2}));
  EXPECT_EQ(proportional_alloc(g, 2, ProportionalMode::kUniform).b, (std::vector<Budget>{0, 0, 0}));
  EXPECT_EQ(proportional_alloc(g, 100, ProportionalMode::kUniform).b, (std::vector<Budget>{3, 3, 3}));
}

TEST(Proportional, WeightedByReachableGain) {
  // One target with g=1; top-level mu (1, 0.5, 0.5) gives w = (1, 0.5, 0.5),
  // proportional to (2, 1, 1); B=4 splits into (2, 1, 1).
  CoBrandingGraph g(flat_grid(3, 1, {1, 2, 3}, 3));
  g.set_gain(0, 1.0);
  const double top[3] = {1.0, 0.5, 0.5};
  for (int u = 0; u < 3; ++u)
    for (int l = 0; l < 3; ++l) g.set_mu_at(u, l, 0, top[u] * (l + 1) / 3.0);
  auto a = proportional_alloc(g, 4, ProportionalMode::kWeighted);
  EXPECT_EQ(a.b, (std::vector<Budget>{2, 1, 1}));
  EXPECT_TRUE(validate_allocation(g, a).empty());
}

TEST(Proportional, AlwaysFeasible) {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 100; ++i) {
    auto grid = oracle::random_grid(rng, 1 + rng() % 6, 1 + rng() % 5, 3, 6);
    auto g = oracle::random_graph(rng, grid);
    const Budget B = rng() % 20;
    for (auto mode : {ProportionalMode::kUniform, ProportionalMode::kWeighted}) {
      EXPECT_TRUE(validate_allocation(g, proportional_alloc(g, B, mode)).empty());
    }
  }
}

TEST(BruteForce, CandidateBound) {
  EXPECT_EQ(candidate_count(flat_grid(10, 1, {1, 2, 3}, 3)), 1048576.0);
  EXPECT_LE(candidate_count(flat_grid(10, 1, {1, 2, 3}, 3)), kDefaultOracleLimit);
}

TEST(BruteForce, TwoByOneFixture) {
  auto res = brute_force_opt(two_by_one(), 1);
  EXPECT_EQ(res.allocation.b, (std::vector<Budget>{1, 0}));
  EXPECT_DOUBLE_EQ(res.expected_reward, 0.8);
  EXPECT_EQ(res.candidates, 4.0);
}

TEST(BruteForce, MatchesExhaustiveOracleAndDominatesGpe) {
  std::mt19937_64 rng(10);
  for (int i = 0; i < 100; ++i) {
    auto grid = oracle::random_grid(rng, 1 + rng() % 5, 1 + rng() % 6, 3, 4);
    auto g = oracle::random_graph(rng, grid);
    const Budget B = rng() % 12;
    auto res = brute_force_opt(g, B);
    EXPECT_TRUE(validate_allocation(g, res.allocation).empty());
    EXPECT_NEAR(res.expected_reward, oracle::best_reward(g, B), 1e-12);
    EXPECT_GE(res.expected_reward, gpe(g, B, 3).expected_reward - 1e-12);
  }
}

TEST(BruteForce, RefusesAboveLimit) {
  CoBrandingGraph g(flat_grid(3, 1, {1}, 1));
  g.set_gain(0, 1.0);
  for (int u = 0; u < 3; ++u) g.set_mu_at(u, 0, 0, 0.5);
  try {
    brute_force_opt(g, 3, 7.0);
    FAIL() << "expected OracleLimitExceeded";
  } catch (const OracleLimitExceeded& e) {
    EXPECT_EQ(e.candidates(), 8.0);
  }
}

TEST(OfflineComparison, ColumnsConsistent) {
  std::mt19937_64 rng(11);
  auto g = oracle::random_graph(rng, flat_grid(5, 8, {1, 2, 3}, 3));
  for (const auto& row : compare_offline(g, {2, 4, 6, 9}, 3)) {
    EXPECT_GE(row.gpe, row.gbo);
    EXPECT_GE(row.gbo, 0.0);
    EXPECT_GE(row.gpe, row.prop_s);
  }
}

}  // namespace
}  // namespace cobrand
