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

// JSON graph files: {num_initiators, num_targets, plans, caps, g_cap, gains,
// mu: [{u, v, s, p}]}, 0-based indices, integer spends. The optional "kind"
// key tags the envelope ("graph", "spec", "history", "learner", ...).

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "cobrand/errors.hpp"
#include "cobrand/graph.hpp"

namespace cobrand {

using Json = nlohmann::json;

inline Json grid_to_json(const PlanGrid& grid) {
  return Json{{"num_initiators", grid.num_initiators},
              {"num_targets", grid.num_targets},
              {"plans", grid.plans},
              {"caps", grid.caps}};
}

inline PlanGrid grid_from_json(const Json& j) {
  try {
    PlanGrid g;
    g.num_initiators = j.at("num_initiators").get<int>();
    g.num_targets = j.at("num_targets").get<int>();
    g.plans = j.at("plans").get<std::vector<std::vector<Budget>>>();
    g.caps = j.at("caps").get<std::vector<Budget>>();
    auto bad = g.violations();
    if (!bad.empty()) throw MalformedInput("invalid plan grid: " + bad.front());
    return g;
  } catch (const Json::exception& e) {
    throw MalformedInput(std::string("plan grid: ") + e.what());
  }
}

inline Json graph_to_json(const CoBrandingGraph& g) {
  Json j = grid_to_json(g.grid());
  j["kind"] = "graph";
  j["g_cap"] = g.g_cap();
  j["gains"] = std::vector<double>(g.gains().begin(), g.gains().end());
  Json mu = Json::array();
  for (int u = 0; u < g.num_initiators(); ++u) {
    for (int v = 0; v < g.num_targets(); ++v) {
      for (int l = 0; l < g.grid().num_levels(u); ++l) {
        if (!g.has_mu(u, l, v)) continue;
        mu.push_back({{"u", u}, {"v", v}, {"s", g.plans(u)[l]}, {"p", g.mu_at(u, l, v)}});
      }
    }
  }
  j["mu"] = std::move(mu);
  return j;
}

inline CoBrandingGraph graph_from_json(const Json& j) {
  if (j.contains("kind") && j.at("kind") != "graph") {
    throw MalformedInput("expected a graph document, got kind=" + j.at("kind").dump());
  }
  CoBrandingGraph g(grid_from_json(j), j.value("g_cap", 1.0));
  try {
    auto gains = j.at("gains").get<std::vector<double>>();
    if (static_cast<int>(gains.size()) != g.num_targets()) {
      throw MalformedInput("gains length does not match num_targets");
    }
    for (int v = 0; v < g.num_targets(); ++v) g.set_gain(v, gains[v]);
    for (const auto& rec : j.at("mu")) {
      const int u = rec.at("u").get<int>();
      const int v = rec.at("v").get<int>();
      const Budget s = rec.at("s").get<Budget>();
      if (u < 0 || u >= g.num_initiators() || v < 0 || v >= g.num_targets()) {
        throw MalformedInput("mu record index out of range");
      }
      auto l = g.grid().level_index(u, s);
      if (!l || *l == kUnfunded) throw MalformedInput("mu record spend is not a plan level");
      g.set_mu_at(u, *l, v, rec.at("p").get<double>());
    }
  } catch (const Json::exception& e) {
    throw MalformedInput(std::string("graph: ") + e.what());
  }
  auto bad = g.violations();
  if (!bad.empty()) throw MalformedInput("invalid graph: " + bad.front());
  return g;
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw LoadError("cannot parse " + path + ": " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw LoadError("cannot write " + path);
  out << text;
  if (!out) throw LoadError("write failed for " + path);
}

inline void write_json_file(const std::string& path, const Json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

}  // namespace cobrand
