#pragma once

#include "radalloc/cbba.hpp"
#include "radalloc/oracle.hpp"
#include "radalloc/scenario.hpp"

#include <json.hpp>

#include <cstdio>
#include <functional>
#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace radalloc {

struct StepMetrics {
  long t = 0;
  double total_utility = 0.0;
  double coverage_main = 0.0;
  double coverage_optional = 0.0;
  double mean_load = 0.0;
  std::map<RadarId, double> per_radar_load;
  int conflicts = 0;  // targets with more than one claimed main radar
};

struct ComparisonRow {
  long t = 0;
  double dec_utility = 0.0;       // decentralized, full objective
  double dec_main_utility = 0.0;  // decentralized, main assignments only
  double central_p1 = 0.0;
  double central_p2 = 0.0;
  double ratio_p1 = 0.0;  // dec_main_utility / central_p1
  double ratio_p2 = 0.0;  // dec_utility / central_p2
  double cov_dec = 0.0;
  double cov_central = 0.0;
  double cov_opt_dec = 0.0;
  double cov_opt_central = 0.0;
  double load_dec = 0.0;
  double load_central = 0.0;
};

// Moving target state inside a run.
struct WorldTarget {
  TargetSpec spec;
  Vec2 position = Vec2::Zero();
  std::size_t next_waypoint = 0;
};

class World {
public:
  explicit World(const std::vector<TargetSpec>& targets) {
    for (const auto& t : targets) {
      targets_.push_back({t, t.position, 0});
    }
  }

  void step(double dt) {
    for (auto& t : targets_) {
      if (t.spec.motion == MotionModel::kConstantVelocity) {
        t.position += dt * t.spec.velocity;
      } else {
        const double speed = t.spec.velocity.norm();
        double travel = speed * dt;
        while (travel > 0.0 && t.next_waypoint < t.spec.waypoints.size()) {
          const Vec2 goal = t.spec.waypoints[t.next_waypoint];
          const double dist = (goal - t.position).norm();
          if (dist <= travel) {
            t.position = goal;
            travel -= dist;
            ++t.next_waypoint;
          } else {
            t.position += (travel / dist) * (goal - t.position);
            travel = 0.0;
          }
        }
      }
    }
  }

  std::map<TargetId, Vec2> truth() const {
    std::map<TargetId, Vec2> out;
    for (const auto& t : targets_) out.emplace(t.spec.id, t.position);
    return out;
  }

private:
  std::vector<WorldTarget> targets_;
};

struct SimObservation {
  long t = 0;
  const std::map<TargetId, Vec2>* truth = nullptr;
  const std::vector<RadarAgent>* agents = nullptr;
  const ProblemInstance* instance = nullptr;
  const Assignment* claimed = nullptr;
  const StepMetrics* metrics = nullptr;
};

struct RunOptions {
  std::vector<long> compare_steps;  // steps at which the oracle is consulted
  std::ostream* trace_out = nullptr;  // jsonl stream of every message sent
  std::function<void(const SimObservation&)> observer;
};

struct RunResult {
  std::vector<StepMetrics> metrics;
  std::vector<ComparisonRow> comparisons;
  Assignment final_assignment;
  int dominance_warnings = 0;  // bonus exceeded a tenth of its main term
  int eps_floor_warnings = 0;  // nonempty-intersection bonus at or below eps_min
};

namespace detail {

inline nlohmann::json ellipse_to_json(const Ellipse& e) {
  return {{"center", {e.center().x(), e.center().y()}},
          {"shape",
           {{e.shape()(0, 0), e.shape()(0, 1)},
            {e.shape()(1, 0), e.shape()(1, 1)}}},
          {"scale", e.scale()}};
}

inline nlohmann::json message_to_json(const CbbaMessage& msg) {
  nlohmann::json j;
  j["sender"] = msg.sender;
  j["send_time"] = msg.send_time;
  j["round"] = msg.round == Round::kMain ? "MAIN" : "OPTIONAL";
  j["y"] = nlohmann::json::object();
  for (const auto& [tid, bid] : msg.y) j["y"][std::to_string(tid)] = bid;
  j["z"] = nlohmann::json::object();
  for (const auto& [tid, rid] : msg.z) j["z"][std::to_string(tid)] = rid;
  j["s"] = nlohmann::json::object();
  for (const auto& [rid, t] : msg.s) j["s"][std::to_string(rid)] = t;
  if (msg.round == Round::kMain) {
    j["e"] = nlohmann::json::object();
    for (const auto& [tid, e] : msg.e) {
      j["e"][std::to_string(tid)] = ellipse_to_json(e);
    }
  }
  return j;
}

}  // namespace detail

// Debug dump of an allocation instance, mirroring the ProblemInstance
// fields; pair keys are "i,k".
inline nlohmann::json instance_to_json(const ProblemInstance& inst) {
  nlohmann::json j;
  j["radars"] = inst.radars;
  j["targets"] = inst.targets;
  j["budgets"] = nlohmann::json::object();
  for (const auto& [i, b] : inst.budgets) {
    j["budgets"][std::to_string(i)] = b;
  }
  j["utilities_main"] = nlohmann::json::object();
  for (const auto& [key, c] : inst.utilities_main) {
    j["utilities_main"][std::to_string(key.first)]
                       [std::to_string(key.second)] = c;
  }
  j["utilities_pair"] = nlohmann::json::object();
  for (const auto& [key, c] : inst.utilities_pair) {
    const auto& [i, k, t] = key;
    j["utilities_pair"][std::to_string(i) + "," + std::to_string(k)]
                       [std::to_string(t)] = c;
  }
  j["costs"] = nlohmann::json::object();
  for (const auto& [key, g] : inst.costs) {
    j["costs"][std::to_string(key.first)][std::to_string(key.second)] = g;
  }
  return j;
}

// Builds the centralized view of the current step from the candidate
// ellipses each radar actually bids with. Pair utilities feed the
// dominance and floor calibration counters.
inline ProblemInstance build_instance(const Scenario& sc,
                                      const std::vector<RadarAgent>& agents,
                                      int* dominance_warnings = nullptr,
                                      int* eps_floor_warnings = nullptr) {
  ProblemInstance inst;
  for (const auto& t : sc.targets) inst.targets.push_back(t.id);
  for (const auto& agent : agents) {
    const RadarId i = agent.config().id;
    inst.radars.push_back(i);
    inst.budgets[i] = agent.config().params.budget;
    for (const auto& [j, u] : agent.candidate_utilities()) {
      inst.utilities_main[{i, j}] = u;
      inst.costs[{i, j}] = sc.gamma;
    }
  }
  for (const auto& main_agent : agents) {
    const RadarId i = main_agent.config().id;
    for (const auto& [j, e_main] : main_agent.candidate_ellipses()) {
      const double f_term = main_agent.candidate_utilities().at(j);
      for (const auto& opt_agent : agents) {
        const RadarId k = opt_agent.config().id;
        if (k == i) continue;
        auto e_opt = opt_agent.candidate_ellipses().find(j);
        if (e_opt == opt_agent.candidate_ellipses().end()) continue;
        const double overlap = intersection_area(e_main, e_opt->second);
        const double bonus = pair_bonus_for_area(overlap, sc.utility);
        inst.utilities_pair[{i, k, j}] = f_term + bonus;
        if (dominance_warnings && !utility_dominance_ok(f_term, bonus)) {
          ++*dominance_warnings;
        }
        if (eps_floor_warnings && overlap > 0.0 && bonus <= sc.utility.eps_min) {
          ++*eps_floor_warnings;
        }
      }
    }
  }
  return inst;
}

// Collapses the radars' claimed bundles to a global assignment. A target
// claimed as main by several radars is a conflict and counts for nobody;
// an optional claim is kept only when a distinct main claim exists.
inline Assignment claimed_assignment(const std::vector<RadarAgent>& agents,
                                     int* conflicts = nullptr) {
  std::map<TargetId, std::vector<RadarId>> mains;
  std::map<TargetId, std::vector<RadarId>> optionals;
  for (const auto& agent : agents) {
    for (TargetId j : agent.main_belief().bundle) {
      mains[j].push_back(agent.config().id);
    }
    for (TargetId j : agent.optional_belief().bundle) {
      optionals[j].push_back(agent.config().id);
    }
  }
  if (conflicts) {
    *conflicts = 0;
    for (const auto& [j, claimants] : mains) {
      if (claimants.size() > 1) ++*conflicts;
    }
  }
  Assignment asg;
  for (const auto& [j, claimants] : mains) {
    if (claimants.size() == 1) asg.main[j] = claimants.front();
  }
  for (const auto& [j, claimants] : optionals) {
    if (claimants.size() != 1) continue;
    const RadarId k = claimants.front();
    const RadarId i = asg.main_of(j);
    if (i != kNoRadar && i != k) asg.optional[j] = k;
  }
  return asg;
}

inline std::vector<RadarAgent> make_agents(const Scenario& sc) {
  Rng root(sc.seed);
  std::vector<RadarAgent> agents;
  agents.reserve(sc.radars.size());
  for (const auto& r : sc.radars) {
    RadarAgent::Config cfg;
    cfg.id = r.id;
    cfg.params = r.params;
    cfg.utility = sc.utility;
    cfg.gamma = sc.gamma;
    cfg.ellipse_scale = sc.scale;
    cfg.t_stale = sc.t_stale;
    cfg.dt = sc.dt;
    agents.emplace_back(cfg, root.fork(static_cast<std::uint64_t>(r.id) + 1));
    if (sc.freeze_utilities) agents.back().set_frozen(true);
  }
  return agents;
}

inline RunResult run(const Scenario& sc, const RunOptions& opts = {}) {
  validate(sc);
  RunResult result;
  World world(sc.targets);
  std::vector<RadarAgent> agents = make_agents(sc);

  const auto adj = detail::adjacency(sc);
  std::map<RadarId, std::vector<CbbaMessage>> inbox;
  const double n_targets = static_cast<double>(sc.targets.size());

  for (long t = 0; t < sc.steps; ++t) {
    world.step(sc.dt);
    const std::map<TargetId, Vec2> truth = world.truth();

    std::map<RadarId, std::vector<CbbaMessage>> next_inbox;
    for (auto& agent : agents) {
      const RadarId id = agent.config().id;
      auto out = agent.step(inbox[id], truth, t);
      for (RadarId nbr : adj.at(id)) {
        next_inbox[nbr].push_back(out.main_msg);
        next_inbox[nbr].push_back(out.optional_msg);
      }
      if (opts.trace_out) {
        *opts.trace_out << detail::message_to_json(out.main_msg).dump() << "\n";
        *opts.trace_out << detail::message_to_json(out.optional_msg).dump()
                        << "\n";
      }
    }
    inbox.swap(next_inbox);

    const ProblemInstance inst = build_instance(
        sc, agents, &result.dominance_warnings, &result.eps_floor_warnings);

    StepMetrics m;
    m.t = t;
    const Assignment claimed = claimed_assignment(agents, &m.conflicts);
    m.total_utility = evaluate(inst, claimed).utility;
    if (n_targets > 0) {
      m.coverage_main =
          static_cast<double>(claimed.main.size()) / n_targets;
      m.coverage_optional =
          static_cast<double>(claimed.optional.size()) / n_targets;
    }
    double load_sum = 0.0;
    for (const auto& agent : agents) {
      const double load = agent.load();
      m.per_radar_load[agent.config().id] = load;
      load_sum += load;
    }
    m.mean_load = agents.empty() ? 0.0 : load_sum / agents.size();

    if (std::find(opts.compare_steps.begin(), opts.compare_steps.end(), t) !=
        opts.compare_steps.end()) {
      ComparisonRow row;
      row.t = t;
      Assignment main_only = claimed;
      main_only.optional.clear();
      row.dec_utility = m.total_utility;
      row.dec_main_utility = evaluate(inst, main_only).utility;
      Assignment p1;
      Assignment p2;
      try {
        p1 = solve_p1(inst);
        p2 = solve_p2(inst);
      } catch (const CapacityError& err) {
        throw CapacityError(std::string(err.what()) + " at step " +
                            std::to_string(t));
      }
      row.central_p1 = p1.total_utility;
      row.central_p2 = p2.total_utility;
      row.ratio_p1 =
          row.central_p1 > 0.0 ? row.dec_main_utility / row.central_p1 : 1.0;
      row.ratio_p2 =
          row.central_p2 > 0.0 ? row.dec_utility / row.central_p2 : 1.0;
      row.cov_dec = m.coverage_main;
      row.cov_opt_dec = m.coverage_optional;
      if (n_targets > 0) {
        row.cov_central = static_cast<double>(p2.main.size()) / n_targets;
        row.cov_opt_central =
            static_cast<double>(p2.optional.size()) / n_targets;
      }
      row.load_dec = m.mean_load;
      double central_load = 0.0;
      for (const auto& agent : agents) {
        const RadarId i = agent.config().id;
        double used = 0.0;
        for (const auto& [j, main_i] : p2.main) {
          if (main_i == i) used += sc.gamma;
        }
        for (const auto& [j, opt_i] : p2.optional) {
          if (opt_i == i) used += sc.gamma;
        }
        central_load += used / agent.config().params.budget;
      }
      row.load_central = agents.empty() ? 0.0 : central_load / agents.size();
      result.comparisons.push_back(row);
    }

    result.metrics.push_back(m);
    result.final_assignment = claimed;

    if (opts.observer) {
      SimObservation obs;
      obs.t = t;
      obs.truth = &truth;
      obs.agents = &agents;
      obs.instance = &inst;
      obs.claimed = &claimed;
      obs.metrics = &m;
      opts.observer(obs);
    }
  }
  return result;
}

// Freezes the world at the sampled steps and pits the auction outcome
// against the exact P1/P2 optima on the same utilities.
inline std::vector<ComparisonRow> compare_centralized(
    const Scenario& sc, const std::vector<long>& at_steps) {
  RunOptions opts;
  opts.compare_steps = at_steps;
  return run(sc, opts).comparisons;
}

// ---------------------------------------------------------------------------
// CSV output. Formatting goes through snprintf so reruns are byte-identical.

namespace detail {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace detail

inline void write_metrics_csv(const std::vector<StepMetrics>& metrics,
                              std::ostream& out) {
  out << "t,total_utility,coverage_main,coverage_optional,mean_load,conflicts\n";
  for (const auto& m : metrics) {
    out << m.t << ',' << detail::format_double(m.total_utility) << ','
        << detail::format_double(m.coverage_main) << ','
        << detail::format_double(m.coverage_optional) << ','
        << detail::format_double(m.mean_load) << ',' << m.conflicts << "\n";
  }
}

inline void write_comparison_csv(const std::vector<ComparisonRow>& rows,
                                 std::ostream& out) {
  out << "t,dec_utility,central_p1,central_p2,ratio_p1,ratio_p2,cov_dec,"
         "cov_central,load_dec,load_central\n";
  for (const auto& r : rows) {
    out << r.t << ',' << detail::format_double(r.dec_utility) << ','
        << detail::format_double(r.central_p1) << ','
        << detail::format_double(r.central_p2) << ','
        << detail::format_double(r.ratio_p1) << ','
        << detail::format_double(r.ratio_p2) << ','
        << detail::format_double(r.cov_dec) << ','
        << detail::format_double(r.cov_central) << ','
        << detail::format_double(r.load_dec) << ','
        << detail::format_double(r.load_central) << "\n";
  }
}

}  // namespace radalloc
