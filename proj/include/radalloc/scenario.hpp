#pragma once

#include "radalloc/allocation.hpp"
#include "radalloc/ids.hpp"
#include "radalloc/rng.hpp"
#include "radalloc/tracking.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace radalloc {

enum class Topology { kComplete, kLine, kRing, kRandomConnected };

enum class MotionModel { kConstantVelocity, kWaypoints };

struct TargetSpec {
  TargetId id = 0;
  Vec2 position = Vec2::Zero();
  Vec2 velocity = Vec2::Zero();
  MotionModel motion = MotionModel::kConstantVelocity;
  std::vector<Vec2> waypoints;
};

struct RadarSpec {
  RadarId id = 0;
  RadarParams params;
};

// Everything needed to reproduce one run; all quantities in SI units.
struct Scenario {
  std::uint64_t seed = 0;
  int steps = 100;
  double dt = 1.0;
  std::vector<RadarSpec> radars;
  std::vector<std::pair<RadarId, RadarId>> comm_edges;
  std::vector<TargetSpec> targets;
  UtilityParams utility;
  double gamma = 1.0;
  long t_stale = 10;
  double scale = 2.0;  // confidence multiplier of every uncertainty ellipse
  // Test mode: hold each radar's candidate ellipses fixed after the first
  // step so the auction runs on frozen utilities.
  bool freeze_utilities = false;
};

namespace detail {

inline std::map<RadarId, std::vector<RadarId>> adjacency(
    const Scenario& sc) {
  std::map<RadarId, std::vector<RadarId>> adj;
  for (const auto& r : sc.radars) adj[r.id];
  for (const auto& [a, b] : sc.comm_edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  for (auto& [id, nbrs] : adj) {
    std::sort(nbrs.begin(), nbrs.end());
    nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
  }
  return adj;
}

inline bool is_connected(const std::map<RadarId, std::vector<RadarId>>& adj) {
  if (adj.empty()) return true;
  std::set<RadarId> seen;
  std::queue<RadarId> frontier;
  frontier.push(adj.begin()->first);
  seen.insert(adj.begin()->first);
  while (!frontier.empty()) {
    const RadarId v = frontier.front();
    frontier.pop();
    for (RadarId w : adj.at(v)) {
      if (seen.insert(w).second) frontier.push(w);
    }
  }
  return seen.size() == adj.size();
}

}  // namespace detail

// Longest shortest path of the communication graph.
inline int graph_diameter(const Scenario& sc) {
  const auto adj = detail::adjacency(sc);
  int diameter = 0;
  for (const auto& [start, nbrs] : adj) {
    std::map<RadarId, int> dist{{start, 0}};
    std::queue<RadarId> frontier;
    frontier.push(start);
    while (!frontier.empty()) {
      const RadarId v = frontier.front();
      frontier.pop();
      for (RadarId w : adj.at(v)) {
        if (!dist.count(w)) {
          dist[w] = dist[v] + 1;
          frontier.push(w);
        }
      }
    }
    for (const auto& [id, d] : dist) diameter = std::max(diameter, d);
  }
  return diameter;
}

inline void validate(const Scenario& sc) {
  if (!(sc.dt > 0.0)) throw std::invalid_argument("scenario: dt must be > 0");
  if (sc.steps < 0) throw std::invalid_argument("scenario: negative steps");
  if (!(sc.gamma > 0.0)) throw std::invalid_argument("scenario: gamma <= 0");
  if (!sc.radars.empty()) {
    double max_budget = 0.0;
    for (const auto& r : sc.radars) {
      max_budget = std::max(max_budget, r.params.budget);
    }
    if (sc.gamma > max_budget) {
      throw std::invalid_argument(
          "scenario: task cost exceeds every radar budget");
    }
  }
  if (!(sc.scale > 0.0)) throw std::invalid_argument("scenario: scale <= 0");
  if (sc.t_stale < 1) throw std::invalid_argument("scenario: t_stale < 1");
  std::set<RadarId> rids;
  for (const auto& r : sc.radars) {
    if (!rids.insert(r.id).second) {
      throw std::invalid_argument("scenario: duplicate radar id " +
                                  std::to_string(r.id));
    }
    if (!(r.params.range_max > 0.0) || !(r.params.budget > 0.0) ||
        !(r.params.snr > 0.0)) {
      throw std::invalid_argument("scenario: invalid radar parameters");
    }
  }
  std::set<TargetId> tids;
  for (const auto& t : sc.targets) {
    if (!tids.insert(t.id).second) {
      throw std::invalid_argument("scenario: duplicate target id " +
                                  std::to_string(t.id));
    }
  }
  for (const auto& [a, b] : sc.comm_edges) {
    if (!rids.count(a) || !rids.count(b) || a == b) {
      throw std::invalid_argument("scenario: invalid comm edge");
    }
  }
  if (!detail::is_connected(detail::adjacency(sc))) {
    throw std::invalid_argument("scenario: communication graph not connected");
  }
}

// ---------------------------------------------------------------------------
// JSON (de)serialization. Key order is alphabetical (nlohmann objects are
// sorted maps), so serialization is byte-stable.

inline nlohmann::json to_json(const Scenario& sc) {
  nlohmann::json j;
  j["seed"] = sc.seed;
  j["steps"] = sc.steps;
  j["dt"] = sc.dt;
  j["gamma"] = sc.gamma;
  j["t_stale"] = sc.t_stale;
  j["scale"] = sc.scale;
  if (sc.freeze_utilities) j["freeze_utilities"] = true;
  j["utility"] = {{"u_max", sc.utility.u_max},
                  {"alpha", sc.utility.alpha},
                  {"v_ref", sc.utility.v_ref},
                  {"eps_min", sc.utility.eps_min}};
  j["radars"] = nlohmann::json::array();
  for (const auto& r : sc.radars) {
    j["radars"].push_back({{"id", r.id},
                           {"position", {r.params.position.x(), r.params.position.y()}},
                           {"range_max", r.params.range_max},
                           {"sigma_r", r.params.noise.sigma_r},
                           {"sigma_theta", r.params.noise.sigma_theta},
                           {"snr", r.params.snr},
                           {"budget", r.params.budget},
                           {"process_noise_q", r.params.process_noise_intensity}});
  }
  j["comm_edges"] = nlohmann::json::array();
  for (const auto& [a, b] : sc.comm_edges) {
    j["comm_edges"].push_back({a, b});
  }
  j["targets"] = nlohmann::json::array();
  for (const auto& t : sc.targets) {
    nlohmann::json tj = {{"id", t.id},
                         {"position", {t.position.x(), t.position.y()}},
                         {"velocity", {t.velocity.x(), t.velocity.y()}}};
    if (t.motion == MotionModel::kWaypoints) {
      tj["motion"] = "waypoints";
      tj["waypoints"] = nlohmann::json::array();
      for (const auto& w : t.waypoints) tj["waypoints"].push_back({w.x(), w.y()});
    } else {
      tj["motion"] = "constant_velocity";
    }
    j["targets"].push_back(tj);
  }
  return j;
}

inline Scenario scenario_from_json(const nlohmann::json& j) {
  Scenario sc;
  sc.seed = j.at("seed").get<std::uint64_t>();
  sc.steps = j.at("steps").get<int>();
  sc.dt = j.at("dt").get<double>();
  sc.gamma = j.value("gamma", 1.0);
  sc.t_stale = j.value("t_stale", 10L);
  sc.scale = j.value("scale", 2.0);
  sc.freeze_utilities = j.value("freeze_utilities", false);
  if (j.count("utility")) {
    const auto& u = j.at("utility");
    sc.utility.u_max = u.value("u_max", 100.0);
    sc.utility.alpha = u.value("alpha", 5.0);
    sc.utility.v_ref = u.value("v_ref", 10.0);
    sc.utility.eps_min = u.value("eps_min", 0.01);
  }
  for (const auto& rj : j.at("radars")) {
    RadarSpec r;
    r.id = rj.at("id").get<RadarId>();
    r.params.position = Vec2(rj.at("position")[0].get<double>(),
                             rj.at("position")[1].get<double>());
    r.params.range_max = rj.value("range_max", 12000.0);
    r.params.noise.sigma_r = rj.value("sigma_r", 2.0);
    r.params.noise.sigma_theta = rj.value("sigma_theta", 2e-3);
    r.params.snr = rj.value("snr", 13.0);
    r.params.budget = rj.value("budget", 4.0);
    r.params.process_noise_intensity = rj.value("process_noise_q", 0.5);
    sc.radars.push_back(r);
  }
  for (const auto& ej : j.value("comm_edges", nlohmann::json::array())) {
    sc.comm_edges.emplace_back(ej[0].get<RadarId>(), ej[1].get<RadarId>());
  }
  for (const auto& tj : j.value("targets", nlohmann::json::array())) {
    TargetSpec t;
    t.id = tj.at("id").get<TargetId>();
    t.position = Vec2(tj.at("position")[0].get<double>(),
                      tj.at("position")[1].get<double>());
    t.velocity = Vec2(tj.value("velocity", std::vector<double>{0, 0})[0],
                      tj.value("velocity", std::vector<double>{0, 0})[1]);
    if (tj.value("motion", "constant_velocity") == std::string("waypoints")) {
      t.motion = MotionModel::kWaypoints;
      for (const auto& wj : tj.value("waypoints", nlohmann::json::array())) {
        t.waypoints.emplace_back(wj[0].get<double>(), wj[1].get<double>());
      }
    }
    sc.targets.push_back(t);
  }
  validate(sc);
  return sc;
}

inline std::string scenario_to_string(const Scenario& sc) {
  return to_json(sc).dump(2) + "\n";
}

inline void save_scenario(const Scenario& sc, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write scenario file: " + path);
  out << scenario_to_string(sc);
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read scenario file: " + path);
  nlohmann::json j;
  in >> j;
  return scenario_from_json(j);
}

// ---------------------------------------------------------------------------
// Random scenario generation.

struct GenSpec {
  int n_radars = 3;
  int n_targets = 10;
  double arena = 20000.0;  // side of the square arena [m]
  std::uint64_t seed = 0;
  Topology topology = Topology::kComplete;
  double speed_min = 5.0;   // [m/s]
  double speed_max = 50.0;  // [m/s]
  int steps = 100;
};

// Radars on a jittered grid, targets uniform in the arena, topology
// connected by construction; fully determined by the seed.
inline Scenario generate_scenario(const GenSpec& gs) {
  if (gs.n_radars < 1 || gs.n_targets < 0) {
    throw std::invalid_argument("generate_scenario: need >= 1 radar");
  }
  Rng rng(gs.seed);
  Scenario sc;
  sc.seed = gs.seed;
  sc.steps = gs.steps;

  const int cells = static_cast<int>(
      std::ceil(std::sqrt(static_cast<double>(gs.n_radars))));
  const double spacing = gs.arena / cells;
  for (int i = 0; i < gs.n_radars; ++i) {
    RadarSpec r;
    r.id = i;
    const int cx = i % cells;
    const int cy = i / cells;
    r.params.position =
        Vec2((cx + 0.5) * spacing + rng.uniform(-0.15, 0.15) * spacing,
             (cy + 0.5) * spacing + rng.uniform(-0.15, 0.15) * spacing);
    sc.radars.push_back(r);
  }

  for (int t = 0; t < gs.n_targets; ++t) {
    TargetSpec target;
    target.id = t;
    target.position = Vec2(rng.uniform(0.0, gs.arena), rng.uniform(0.0, gs.arena));
    const double speed = rng.uniform(gs.speed_min, gs.speed_max);
    const double heading = rng.uniform(0.0, 2.0 * std::numbers::pi);
    target.velocity = speed * Vec2(std::cos(heading), std::sin(heading));
    sc.targets.push_back(target);
  }

  switch (gs.topology) {
    case Topology::kComplete:
      for (int a = 0; a < gs.n_radars; ++a) {
        for (int b = a + 1; b < gs.n_radars; ++b) sc.comm_edges.emplace_back(a, b);
      }
      break;
    case Topology::kLine:
      for (int a = 0; a + 1 < gs.n_radars; ++a) sc.comm_edges.emplace_back(a, a + 1);
      break;
    case Topology::kRing:
      for (int a = 0; a + 1 < gs.n_radars; ++a) sc.comm_edges.emplace_back(a, a + 1);
      if (gs.n_radars > 2) sc.comm_edges.emplace_back(0, gs.n_radars - 1);
      break;
    case Topology::kRandomConnected: {
      bool connected = false;
      for (int attempt = 0; attempt < 64 && !connected; ++attempt) {
        sc.comm_edges.clear();
        for (int a = 0; a < gs.n_radars; ++a) {
          for (int b = a + 1; b < gs.n_radars; ++b) {
            if (rng.uniform() < 0.4) sc.comm_edges.emplace_back(a, b);
          }
        }
        connected = detail::is_connected(detail::adjacency(sc));
      }
      if (!connected) {
        throw std::runtime_error(
            "generate_scenario: no connected random topology found");
      }
      break;
    }
  }

  sc.t_stale = 2L * graph_diameter(sc) + 4;
  validate(sc);
  return sc;
}

}  // namespace radalloc
