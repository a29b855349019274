#pragma once

#include "radalloc/geometry.hpp"

namespace radalloc {

// Parameters of the utility model shared by the auction and the
// centralized solvers. f rewards small uncertainty ellipses, the optional
// bonus alpha * g rewards small (tight) intersections, and the bonus is
// meant to stay well below the main term.
struct UtilityParams {
  double u_max = 100.0;   // utility of a perfectly known target
  double alpha = 5.0;     // weight of the pairing bonus
  double v_ref = 10.0;    // area normalization [m^2]
  double eps_min = 0.01;  // floor the bonus must stay above when nonempty
};

// Main-tracking utility f(V) = u_max / (1 + V / v_ref), strictly
// decreasing in the ellipse area.
inline double utility_main(const Ellipse& e, const UtilityParams& p) {
  return p.u_max / (1.0 + e.area() / p.v_ref);
}

inline double utility_main_for_area(double area, const UtilityParams& p) {
  return p.u_max / (1.0 + area / p.v_ref);
}

// Pairing bonus alpha * g(V_cap) for a given intersection area; zero when
// the ellipses are disjoint. g decreasing: a small overlap of two
// confident estimates pins the target down tightly.
inline double pair_bonus_for_area(double intersection, const UtilityParams& p) {
  if (intersection <= 0.0) {
    return 0.0;
  }
  return p.alpha / (1.0 + intersection / p.v_ref);
}

inline double pair_bonus(const Ellipse& main_e, const Ellipse& optional_e,
                         const UtilityParams& p) {
  return pair_bonus_for_area(intersection_area(main_e, optional_e), p);
}

// Two-radar utility c = f(V(E_main)) + alpha * g(V(E_main ∩ E_opt)).
inline double utility_pair(const Ellipse& main_e, const Ellipse& optional_e,
                           const UtilityParams& p) {
  return utility_main(main_e, p) + pair_bonus(main_e, optional_e, p);
}

// Load-balancing bias applied to every bid: the marginal score of a task
// shrinks as the bundle grows, which keeps the diminishing-marginal-gain
// property the consensus convergence relies on. bundle_size is the size
// before the candidate task is added; the +1 removes the empty-bundle
// singularity of a plain division.
inline double cbba_score(double raw_utility, int bundle_size) {
  return raw_utility / static_cast<double>(bundle_size + 1);
}

// Scenario-calibration check: the main term is supposed to dominate the
// bonus by an order of magnitude on the geometry actually produced.
inline bool utility_dominance_ok(double main_term, double bonus) {
  return bonus <= 0.0 || main_term >= 10.0 * bonus;
}

}  // namespace radalloc
