#pragma once

#include "radalloc/ids.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace radalloc {

// Snapshot of an allocation problem: which radar/pair utilities exist and
// what each task costs. A (i, j) entry is present only when radar i can
// perceive target j; pair entries never carry i == k, the self-pair
// collapses to the main-only utility.
struct ProblemInstance {
  std::vector<RadarId> radars;
  std::map<RadarId, double> budgets;
  std::vector<TargetId> targets;
  std::map<std::pair<RadarId, TargetId>, double> utilities_main;
  std::map<std::tuple<RadarId, RadarId, TargetId>, double> utilities_pair;
  std::map<std::pair<RadarId, TargetId>, double> costs;

  const double* main_utility(RadarId i, TargetId j) const {
    auto it = utilities_main.find({i, j});
    return it == utilities_main.end() ? nullptr : &it->second;
  }
  const double* pair_utility(RadarId i, RadarId k, TargetId j) const {
    auto it = utilities_pair.find({i, k, j});
    return it == utilities_pair.end() ? nullptr : &it->second;
  }
  const double* cost(RadarId i, TargetId j) const {
    auto it = costs.find({i, j});
    return it == costs.end() ? nullptr : &it->second;
  }
};

// A global allocation: at most one main and one optional radar per target.
struct Assignment {
  std::map<TargetId, RadarId> main;
  std::map<TargetId, RadarId> optional;
  double total_utility = 0.0;

  RadarId main_of(TargetId j) const {
    auto it = main.find(j);
    return it == main.end() ? kNoRadar : it->second;
  }
  RadarId optional_of(TargetId j) const {
    auto it = optional.find(j);
    return it == optional.end() ? kNoRadar : it->second;
  }
};

struct EvaluationResult {
  double utility = 0.0;
  bool feasible = true;
  std::vector<std::string> violations;
};

class CapacityError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Recomputes the objective of an assignment and checks the constraints:
// optional requires a distinct main ((A)/(C2)) and per-radar cost totals
// must stay within budget ((L)). Infeasibility is reported, not thrown.
inline EvaluationResult evaluate(const ProblemInstance& inst,
                                 const Assignment& asg) {
  EvaluationResult res;
  std::map<RadarId, double> load;

  auto charge = [&](RadarId i, TargetId j) {
    if (const double* g = inst.cost(i, j)) {
      load[i] += *g;
    } else {
      res.violations.push_back("no cost for radar " + std::to_string(i) +
                               " on target " + std::to_string(j));
    }
  };

  for (TargetId j : inst.targets) {
    const RadarId i = asg.main_of(j);
    const RadarId k = asg.optional_of(j);
    if (i == kNoRadar) {
      if (k != kNoRadar) {
        res.violations.push_back("optional radar without main on target " +
                                 std::to_string(j));
      }
      continue;
    }
    if (k == i) {
      res.violations.push_back("radar " + std::to_string(i) +
                               " is both main and optional on target " +
                               std::to_string(j));
      continue;
    }
    if (k == kNoRadar) {
      if (const double* c = inst.main_utility(i, j)) {
        res.utility += *c;
      } else {
        res.violations.push_back("no main utility for radar " +
                                 std::to_string(i) + " on target " +
                                 std::to_string(j));
      }
      charge(i, j);
    } else {
      if (const double* c = inst.pair_utility(i, k, j)) {
        res.utility += *c;
      } else {
        res.violations.push_back("no pair utility for radars " +
                                 std::to_string(i) + "," + std::to_string(k) +
                                 " on target " + std::to_string(j));
      }
      charge(i, j);
      charge(k, j);
    }
  }

  for (const auto& [i, used] : load) {
    auto it = inst.budgets.find(i);
    if (it == inst.budgets.end()) {
      res.violations.push_back("unknown radar " + std::to_string(i));
    } else if (used > it->second + 1e-9) {
      res.violations.push_back("(L) radar " + std::to_string(i) +
                               " over budget");
    }
  }
  res.feasible = res.violations.empty();
  return res;
}

namespace detail {

// One per-target choice in the branch-and-bound: no radar, a single main,
// or a (main, optional) pair.
struct Option {
  RadarId main = kNoRadar;
  RadarId optional = kNoRadar;
  double utility = 0.0;
};

struct SolverState {
  const std::vector<std::vector<Option>>* options = nullptr;
  const std::vector<TargetId>* targets = nullptr;
  const ProblemInstance* inst = nullptr;
  std::vector<double> suffix_bound;
  std::map<RadarId, double> remaining;
  std::vector<int> chosen;
  std::vector<int> best_chosen;
  double best_value = -1.0;

  // Depth-first in option order, so the first optimum encountered is the
  // lexicographically smallest one; the pruning margin keeps near-ties
  // alive so that result is never skipped.
  void dfs(std::size_t depth, double value) {
    if (depth == options->size()) {
      if (value > best_value) {
        best_value = value;
        best_chosen = chosen;
      }
      return;
    }
    if (value + suffix_bound[depth] <= best_value - 1e-9) {
      return;
    }
    const TargetId j = (*targets)[depth];
    const auto& opts = (*options)[depth];
    for (std::size_t o = 0; o < opts.size(); ++o) {
      const Option& opt = opts[o];
      double g_main = 0.0;
      double g_opt = 0.0;
      if (opt.main != kNoRadar) {
        g_main = *inst->cost(opt.main, j);
        if (g_main > remaining[opt.main] + 1e-9) continue;
      }
      if (opt.optional != kNoRadar) {
        g_opt = *inst->cost(opt.optional, j);
        if (g_opt > remaining[opt.optional] + 1e-9) continue;
      }
      if (opt.main != kNoRadar) remaining[opt.main] -= g_main;
      if (opt.optional != kNoRadar) remaining[opt.optional] -= g_opt;
      chosen[depth] = static_cast<int>(o);
      dfs(depth + 1, value + opt.utility);
      if (opt.main != kNoRadar) remaining[opt.main] += g_main;
      if (opt.optional != kNoRadar) remaining[opt.optional] += g_opt;
    }
  }
};

inline Assignment solve_options(
    const ProblemInstance& inst,
    const std::vector<std::vector<Option>>& options) {
  SolverState st;
  st.options = &options;
  st.targets = &inst.targets;
  st.inst = &inst;
  st.remaining = inst.budgets;
  st.chosen.assign(options.size(), 0);

  st.suffix_bound.assign(options.size() + 1, 0.0);
  for (std::size_t d = options.size(); d-- > 0;) {
    double best = 0.0;
    for (const auto& o : options[d]) best = std::max(best, o.utility);
    st.suffix_bound[d] = st.suffix_bound[d + 1] + best;
  }

  st.dfs(0, 0.0);

  Assignment out;
  out.total_utility = std::max(st.best_value, 0.0);
  for (std::size_t d = 0; d < options.size(); ++d) {
    const Option& o = options[d][static_cast<std::size_t>(st.best_chosen[d])];
    if (o.main != kNoRadar) out.main[inst.targets[d]] = o.main;
    if (o.optional != kNoRadar) out.optional[inst.targets[d]] = o.optional;
  }
  return out;
}

}  // namespace detail

// Exact optimum of the mono-sensor problem P1: assign each target to at
// most one radar, maximizing total main utility under the budget
// constraints. Deterministic tie-break: the lexicographically smallest
// optimal assignment (unassigned before lower radar ids, targets in id
// order).
inline Assignment solve_p1(const ProblemInstance& inst) {
  if (inst.radars.size() > 6 || inst.targets.size() > 14) {
    throw CapacityError("solve_p1: instance too large (" +
                        std::to_string(inst.radars.size()) + " radars, " +
                        std::to_string(inst.targets.size()) + " targets)");
  }
  std::vector<std::vector<detail::Option>> options(inst.targets.size());
  for (std::size_t d = 0; d < inst.targets.size(); ++d) {
    const TargetId j = inst.targets[d];
    options[d].push_back({});  // unassigned
    for (RadarId i : inst.radars) {
      const double* c = inst.main_utility(i, j);
      if (c != nullptr && inst.cost(i, j) != nullptr) {
        options[d].push_back({i, kNoRadar, *c});
      }
    }
  }
  return detail::solve_options(inst, options);
}

// Exact optimum of the multi-sensor problem P2: per target either nothing,
// a single main radar (the collapsed self-pair), or a main/optional pair
// charging both radars' budgets.
inline Assignment solve_p2(const ProblemInstance& inst) {
  if (inst.radars.size() > 4 || inst.targets.size() > 12) {
    throw CapacityError("solve_p2: instance too large (" +
                        std::to_string(inst.radars.size()) + " radars, " +
                        std::to_string(inst.targets.size()) + " targets)");
  }
  std::vector<std::vector<detail::Option>> options(inst.targets.size());
  for (std::size_t d = 0; d < inst.targets.size(); ++d) {
    const TargetId j = inst.targets[d];
    options[d].push_back({});
    for (RadarId i : inst.radars) {
      const double* c = inst.main_utility(i, j);
      if (c != nullptr && inst.cost(i, j) != nullptr) {
        options[d].push_back({i, kNoRadar, *c});
      }
    }
    for (RadarId i : inst.radars) {
      if (inst.main_utility(i, j) == nullptr || inst.cost(i, j) == nullptr) {
        continue;
      }
      for (RadarId k : inst.radars) {
        if (k == i) continue;
        const double* c = inst.pair_utility(i, k, j);
        if (c != nullptr && inst.cost(k, j) != nullptr) {
          options[d].push_back({i, k, *c});
        }
      }
    }
  }
  return detail::solve_options(inst, options);
}

}  // namespace radalloc
