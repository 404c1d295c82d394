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

// Ground-truth environments: synthetic affinity generation, logistic success
// probabilities, per-season stochastic feedback and logged histories.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cobrand/errors.hpp"
#include "cobrand/graph.hpp"
#include "cobrand/graph_io.hpp"
#include "cobrand/random.hpp"
#include "cobrand/stats.hpp"

namespace cobrand {

enum class GainNoise {
  kBernoulli,  // Y = g_cap * Bernoulli(g_v / g_cap)
  kUniform,    // Y ~ U(g_v - w, g_v + w), w = min(g_v, g_cap - g_v)
};

inline std::string to_string(GainNoise n) {
  return n == GainNoise::kBernoulli ? "bernoulli" : "uniform";
}

inline GainNoise gain_noise_from_string(const std::string& s) {
  if (s == "bernoulli") return GainNoise::kBernoulli;
  if (s == "uniform" || s == "clipped-uniform") return GainNoise::kUniform;
  throw MalformedInput("unknown gain noise '" + s + "'");
}

struct EnvironmentSpec {
  int num_initiators = 0;
  int num_targets = 0;
  std::vector<double> affinities;  // row-major U x V, nu_{(u,v)}
  std::vector<double> gains;       // g_v
  double beta = 1.0;               // budget sensitivity inside the logistic link
  double g_cap = 1.0;
  std::uint64_t seed = 0;
  GainNoise gain_noise = GainNoise::kBernoulli;

  double affinity(int u, int v) const {
    return affinities[static_cast<std::size_t>(u) * num_targets + v];
  }

  void check_shape() const {
    if (static_cast<int>(affinities.size()) != num_initiators * num_targets) {
      throw MalformedInput("affinity matrix is not U x V");
    }
    if (static_cast<int>(gains.size()) != num_targets) throw MalformedInput("gains length != V");
  }

  friend bool operator==(const EnvironmentSpec&, const EnvironmentSpec&) = default;
};

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// nu ~ U(-1,1) i.i.d. per pair, g ~ g_cap * U(0,1) i.i.d. per target.
inline EnvironmentSpec gen_synthetic_spec(int U, int V, std::uint64_t seed, double beta = 1.0,
                                          double g_cap = 1.0) {
  if (U < 1 || V < 1) throw PreconditionError("U and V must be >= 1");
  EnvironmentSpec spec;
  spec.num_initiators = U;
  spec.num_targets = V;
  spec.beta = beta;
  spec.g_cap = g_cap;
  spec.seed = seed;
  Rng rng(seed);
  std::uniform_real_distribution<double> nu(-1.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  spec.affinities.resize(static_cast<std::size_t>(U) * V);
  // Both distributions are half-open; redraw the closed endpoint.
  for (auto& a : spec.affinities) {
    do a = nu(rng);
    while (a <= -1.0);
  }
  spec.gains.resize(V);
  for (auto& g : spec.gains) {
    double x;
    do x = unit(rng);
    while (x <= 0.0);
    g = g_cap * x;
  }
  return spec;
}

// mu_{(u,v),s} = logistic(nu_{(u,v)} + beta * s) at every plan level s.
inline CoBrandingGraph truth_graph(const EnvironmentSpec& spec, const PlanGrid& grid) {
  spec.check_shape();
  if (grid.num_initiators != spec.num_initiators || grid.num_targets != spec.num_targets) {
    throw MalformedInput("plan grid shape does not match environment");
  }
  auto bad = grid.violations();
  if (!bad.empty()) throw PreconditionError("invalid plan grid: " + bad.front());
  CoBrandingGraph g(grid, spec.g_cap);
  for (int v = 0; v < spec.num_targets; ++v) g.set_gain(v, spec.gains[v]);
  for (int u = 0; u < spec.num_initiators; ++u) {
    for (int l = 0; l < grid.num_levels(u); ++l) {
      const double s = static_cast<double>(grid.plans[u][l]);
      for (int v = 0; v < spec.num_targets; ++v) {
        g.set_mu_at(u, l, v, logistic(spec.affinity(u, v) + spec.beta * s));
      }
    }
  }
  return g;
}

inline CoBrandingGraph truth_graph(const EnvironmentSpec& spec,
                                   std::vector<std::vector<Budget>> plans,
                                   std::vector<Budget> caps) {
  PlanGrid grid{spec.num_initiators, spec.num_targets, std::move(plans), std::move(caps)};
  return truth_graph(spec, grid);
}

struct EdgeOutcome {
  int u = 0;
  int v = 0;
  Budget s = 0;
  int x = 0;
};

struct GainObservation {
  int v = 0;
  double y = 0.0;
};

// One season of feedback. Gain observations exist only for targets with at
// least one successful edge; realized_reward is their sum.
struct FeedbackRecord {
  std::vector<EdgeOutcome> edge_outcomes;
  std::vector<GainObservation> target_gains;
  double realized_reward = 0.0;
};

inline double sample_gain(Rng& rng, double g, double g_cap, GainNoise noise) {
  if (noise == GainNoise::kBernoulli) {
    return g_cap > 0.0 && bernoulli(rng, g / g_cap) ? g_cap : 0.0;
  }
  const double w = std::min(g, g_cap - g);
  return g + w * (2.0 * uniform01(rng) - 1.0);
}

inline FeedbackRecord sample_round(const CoBrandingGraph& truth, const ActionSet& actions,
                                   GainNoise noise, Rng& rng) {
  FeedbackRecord fb;
  const int V = truth.num_targets();
  std::vector<char> hit(V, 0);
  fb.edge_outcomes.reserve(actions.size());
  for (const auto& a : actions) {
    const int x = bernoulli(rng, truth.mu(a.u, a.v, a.s)) ? 1 : 0;
    fb.edge_outcomes.push_back({a.u, a.v, a.s, x});
    if (x) hit[a.v] = 1;
  }
  for (int v = 0; v < V; ++v) {
    if (!hit[v]) continue;
    const double y = sample_gain(rng, truth.gain(v), truth.g_cap(), noise);
    fb.target_gains.push_back({v, y});
    fb.realized_reward += y;
  }
  return fb;
}

inline FeedbackRecord sample_round(const CoBrandingGraph& truth, const ActionSet& actions,
                                   const EnvironmentSpec& spec, Rng& rng) {
  return sample_round(truth, actions, spec.gain_noise, rng);
}

// Draws allocations uniformly from the feasible set {b : b_u in {0} ∪ N_u,
// b_u <= c_u, sum b <= B}, via a completion-count table over (u, budget left).
class FeasibleAllocationSampler {
 public:
  FeasibleAllocationSampler(const PlanGrid& grid, Budget total_budget)
      : grid_(grid), total_(total_budget) {
    const int U = grid.num_initiators;
    Budget reach = 0;
    for (int u = 0; u < U; ++u) {
      const int top = grid.top_level(u);
      if (top != kUnfunded) reach += grid.plans[u][top];
    }
    width_ = std::min(total_budget, reach);
    if (width_ < 0) throw PreconditionError("negative total budget");
    // ways_[u][r]: number of feasible completions for sub-brands u..U-1 with r left.
    ways_.assign(U + 1, std::vector<double>(width_ + 1, 1.0));
    for (int u = U - 1; u >= 0; --u) {
      for (Budget r = 0; r <= width_; ++r) {
        double w = ways_[u + 1][r];
        for (Budget s : grid.plans[u]) {
          if (s <= grid.caps[u] && s <= r) w += ways_[u + 1][r - s];
        }
        ways_[u][r] = w;
      }
    }
  }

  // Number of feasible allocations (including the zero allocation).
  double count() const { return ways_[0][width_]; }

  BudgetAllocation sample(Rng& rng) const {
    BudgetAllocation alloc{std::vector<Budget>(grid_.num_initiators, 0), total_};
    Budget left = width_;
    for (int u = 0; u < grid_.num_initiators; ++u) {
      const double total = ways_[u][left];
      double pick = uniform01(rng) * total;
      Budget chosen = 0;
      double acc = ways_[u + 1][left];
      if (pick >= acc) {
        for (Budget s : grid_.plans[u]) {
          if (s > grid_.caps[u] || s > left) continue;
          chosen = s;
          acc += ways_[u + 1][left - s];
          if (pick < acc) break;
        }
      }
      alloc.b[u] = chosen;
      left -= chosen;
    }
    return alloc;
  }

 private:
  PlanGrid grid_;
  Budget total_;
  Budget width_ = 0;
  std::vector<std::vector<double>> ways_;
};

// Aggregated logged seasons. Arm statistics share the mu layout
// ([u][level * V + v]); revenue fields feed the budget/cap rules.
struct HistoryDataset {
  PlanGrid grid;
  int num_seasons = 0;
  std::vector<std::vector<RunningStats>> arm_stats;
  std::vector<RunningStats> gain_stats;
  double total_revenue = 0.0;
  std::vector<double> initiator_revenue;  // Y split equally among successful edges into v

  static HistoryDataset empty(const PlanGrid& grid) {
    HistoryDataset h;
    h.grid = grid;
    h.arm_stats.resize(grid.num_initiators);
    for (int u = 0; u < grid.num_initiators; ++u) {
      h.arm_stats[u].resize(static_cast<std::size_t>(grid.num_levels(u)) * grid.num_targets);
    }
    h.gain_stats.resize(grid.num_targets);
    h.initiator_revenue.assign(grid.num_initiators, 0.0);
    return h;
  }

  const RunningStats& arm(int u, int level, int v) const {
    return arm_stats[u][static_cast<std::size_t>(level) * grid.num_targets + v];
  }
  RunningStats& arm(int u, int level, int v) {
    return arm_stats[u][static_cast<std::size_t>(level) * grid.num_targets + v];
  }

  void record(const FeedbackRecord& fb) {
    ++num_seasons;
    std::vector<int> successes(grid.num_targets, 0);
    for (const auto& e : fb.edge_outcomes) {
      auto l = grid.level_index(e.u, e.s);
      if (!l || *l == kUnfunded) throw MalformedInput("feedback spend off the plan grid");
      arm(e.u, *l, e.v).push(e.x);
      successes[e.v] += e.x;
    }
    for (const auto& g : fb.target_gains) {
      gain_stats[g.v].push(g.y);
      total_revenue += g.y;
      const double share = g.y / successes[g.v];
      for (const auto& e : fb.edge_outcomes) {
        if (e.v == g.v && e.x) initiator_revenue[e.u] += share;
      }
    }
  }
};

// Simulates D seasons under the logging policy: one uniformly random
// feasible allocation per season.
inline HistoryDataset gen_history(const CoBrandingGraph& truth, GainNoise noise, int D,
                                  Budget total_budget, Rng& rng) {
  if (D < 0) throw PreconditionError("D must be >= 0");
  HistoryDataset h = HistoryDataset::empty(truth.grid());
  if (D == 0) return h;
  FeasibleAllocationSampler sampler(truth.grid(), total_budget);
  for (int d = 0; d < D; ++d) {
    const auto alloc = sampler.sample(rng);
    h.record(sample_round(truth, action_set(truth, alloc), noise, rng));
  }
  return h;
}

inline HistoryDataset gen_history(const CoBrandingGraph& truth, const EnvironmentSpec& spec,
                                  int D, Budget total_budget, Rng& rng) {
  return gen_history(truth, spec.gain_noise, D, total_budget, rng);
}

namespace detail {

inline std::string trim(std::string s) {
  const auto ws = " \t\r\n";
  const auto a = s.find_first_not_of(ws);
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(ws);
  return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

inline double parse_number(const std::string& cell, int row, int col) {
  double x = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, x);
  if (cell.empty() || ec != std::errc() || ptr != last || !std::isfinite(x)) {
    throw NonNumericCellError("non-numeric cell '" + cell + "' at row " + std::to_string(row + 1) +
                              ", column " + std::to_string(col + 1));
  }
  return x;
}

}  // namespace detail

// Counts CSV: U rows of V non-negative integer co-branding counts, then one
// row of V target gain values; no header. nu = 2 * count / total - 1.
// Gains are taken as already normalized; a row exceeding g_cap is rescaled
// by its maximum.
inline EnvironmentSpec load_counts_dataset(const std::string& path, double g_cap = 1.0,
                                           double beta = 1.0) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line = line.substr(3);
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_csv_line(line);
    std::vector<double> row;
    const int r = static_cast<int>(rows.size());
    for (int c = 0; c < static_cast<int>(cells.size()); ++c) {
      row.push_back(detail::parse_number(cells[c], r, c));
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw RaggedRowsError("row " + std::to_string(r + 1) + " has " + std::to_string(row.size()) +
                            " cells, expected " + std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.size() < 2) throw LoadError("counts dataset needs at least one count row and a gains row");

  EnvironmentSpec spec;
  spec.num_initiators = static_cast<int>(rows.size()) - 1;
  spec.num_targets = static_cast<int>(rows.front().size());
  spec.g_cap = g_cap;
  spec.beta = beta;
  double total = 0.0;
  for (int u = 0; u < spec.num_initiators; ++u) {
    for (int v = 0; v < spec.num_targets; ++v) {
      const double c = rows[u][v];
      if (c < 0.0 || c != std::floor(c)) {
        throw NonNumericCellError("count at row " + std::to_string(u + 1) +
                                  " is not a non-negative integer");
      }
      total += c;
    }
  }
  if (total <= 0.0) throw ZeroTotalError("zero total: count matrix sums to 0");
  spec.affinities.reserve(static_cast<std::size_t>(spec.num_initiators) * spec.num_targets);
  for (int u = 0; u < spec.num_initiators; ++u) {
    for (int v = 0; v < spec.num_targets; ++v) {
      spec.affinities.push_back(2.0 * (rows[u][v] / total) - 1.0);
    }
  }
  const auto& g = rows.back();
  const double gmax = *std::max_element(g.begin(), g.end());
  for (double x : g) {
    if (x < 0.0) throw LoadError("negative gain value in gains row");
  }
  const double scale = gmax > g_cap ? g_cap / gmax : 1.0;
  for (double x : g) spec.gains.push_back(x * scale);
  return spec;
}

inline Json spec_to_json(const EnvironmentSpec& s) {
  Json aff = Json::array();
  for (int u = 0; u < s.num_initiators; ++u) {
    Json row = Json::array();
    for (int v = 0; v < s.num_targets; ++v) row.push_back(s.affinity(u, v));
    aff.push_back(std::move(row));
  }
  return Json{{"kind", "spec"},          {"num_initiators", s.num_initiators},
              {"num_targets", s.num_targets}, {"affinities", std::move(aff)},
              {"gains", s.gains},        {"beta", s.beta},
              {"g_cap", s.g_cap},        {"seed", s.seed},
              {"gain_noise", to_string(s.gain_noise)}};
}

inline EnvironmentSpec spec_from_json(const Json& j) {
  try {
    if (j.value("kind", std::string("spec")) != "spec") throw MalformedInput("expected a spec document");
    EnvironmentSpec s;
    s.num_initiators = j.at("num_initiators").get<int>();
    s.num_targets = j.at("num_targets").get<int>();
    for (const auto& row : j.at("affinities")) {
      for (const auto& x : row) s.affinities.push_back(x.get<double>());
    }
    s.gains = j.at("gains").get<std::vector<double>>();
    s.beta = j.value("beta", 1.0);
    s.g_cap = j.value("g_cap", 1.0);
    s.seed = j.value("seed", std::uint64_t{0});
    s.gain_noise = gain_noise_from_string(j.value("gain_noise", std::string("bernoulli")));
    s.check_shape();
    return s;
  } catch (const Json::exception& e) {
    throw MalformedInput(std::string("spec: ") + e.what());
  }
}

inline Json history_to_json(const HistoryDataset& h) {
  Json j = grid_to_json(h.grid);
  j["kind"] = "history";
  j["num_seasons"] = h.num_seasons;
  j["total_revenue"] = h.total_revenue;
  j["initiator_revenue"] = h.initiator_revenue;
  Json arms = Json::array();
  for (int u = 0; u < h.grid.num_initiators; ++u) {
    for (int l = 0; l < h.grid.num_levels(u); ++l) {
      for (int v = 0; v < h.grid.num_targets; ++v) {
        const auto& a = h.arm(u, l, v);
        if (!a.visited()) continue;
        arms.push_back({{"u", u}, {"v", v}, {"s", h.grid.plans[u][l]}, {"count", a.count},
                        {"mean", a.mean}, {"var", a.var}});
      }
    }
  }
  j["arms"] = std::move(arms);
  Json gains = Json::array();
  for (int v = 0; v < h.grid.num_targets; ++v) {
    const auto& g = h.gain_stats[v];
    if (!g.visited()) continue;
    gains.push_back({{"v", v}, {"count", g.count}, {"mean", g.mean}, {"var", g.var}});
  }
  j["gains"] = std::move(gains);
  return j;
}

inline HistoryDataset history_from_json(const Json& j) {
  try {
    if (j.value("kind", std::string("history")) != "history") {
      throw MalformedInput("expected a history document");
    }
    HistoryDataset h = HistoryDataset::empty(grid_from_json(j));
    h.num_seasons = j.at("num_seasons").get<int>();
    h.total_revenue = j.value("total_revenue", 0.0);
    if (j.contains("initiator_revenue")) {
      h.initiator_revenue = j.at("initiator_revenue").get<std::vector<double>>();
      if (static_cast<int>(h.initiator_revenue.size()) != h.grid.num_initiators) {
        throw MalformedInput("initiator_revenue length != U");
      }
    }
    for (const auto& a : j.at("arms")) {
      const int u = a.at("u").get<int>();
      const int v = a.at("v").get<int>();
      if (u < 0 || u >= h.grid.num_initiators || v < 0 || v >= h.grid.num_targets) {
        throw MalformedInput("history arm index out of range");
      }
      auto l = h.grid.level_index(u, a.at("s").get<Budget>());
      if (!l || *l == kUnfunded) throw MalformedInput("history arm spend off the plan grid");
      auto& st = h.arm(u, *l, v);
      st.count = a.at("count").get<std::int64_t>();
      st.mean = a.at("mean").get<double>();
      st.var = a.at("var").get<double>();
    }
    for (const auto& g : j.at("gains")) {
      const int v = g.at("v").get<int>();
      if (v < 0 || v >= h.grid.num_targets) throw MalformedInput("history gain index out of range");
      auto& st = h.gain_stats[v];
      st.count = g.at("count").get<std::int64_t>();
      st.mean = g.at("mean").get<double>();
      st.var = g.at("var").get<double>();
    }
    return h;
  } catch (const Json::exception& e) {
    throw MalformedInput(std::string("history: ") + e.what());
  }
}

}  // namespace cobrand
