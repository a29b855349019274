#include "radalloc/allocation.hpp"

#include "radalloc/rng.hpp"

#include <catch2/catch.hpp>

#include <numbers>

using namespace radalloc;

namespace {

Ellipse ellipse_with_area(double area) {
  // Circle with radius chosen so that pi r^2 = area at scale 1.
  const double r2 = area / std::numbers::pi;
  return Ellipse(Vec2::Zero(), r2 * Mat2::Identity(), 1.0);
}

}  // namespace

TEST_CASE("main utility is u_max / (1 + V / v_ref)") {
  const UtilityParams p;

  CHECK(utility_main_for_area(0.0, p) == Approx(p.u_max));
  CHECK(utility_main_for_area(p.v_ref, p) == Approx(p.u_max / 2.0));

  const double v = 2.0 * std::numbers::pi;
  const double expected = 100.0 / (1.0 + v / 10.0);  // evaluated directly
  CHECK(expected == Approx(61.4130).epsilon(1e-4));
  CHECK(utility_main(ellipse_with_area(v), p) == Approx(expected).epsilon(1e-9));
}

TEST_CASE("main utility is strictly decreasing in the area") {
  const UtilityParams p;
  Rng rng(8);
  for (int i = 0; i < 1000; ++i) {
    const double v1 = rng.uniform(0.0, 500.0);
    const double v2 = v1 + rng.uniform(1e-6, 500.0);
    CHECK(utility_main_for_area(v1, p) > utility_main_for_area(v2, p));
  }
}

TEST_CASE("pair utility adds a bonus only for nonempty intersections") {
  const UtilityParams p;

  SECTION("disjoint ellipses reduce to the main utility") {
    const Ellipse a = ellipse_with_area(p.v_ref);
    const Ellipse b(Vec2(1000.0, 0.0), Mat2::Identity(), 1.0);
    CHECK(utility_pair(a, b, p) == utility_main(a, p));
  }

  SECTION("identical ellipses at the half point") {
    UtilityParams q;
    q.u_max = 100.0;
    q.alpha = 5.0;
    q.v_ref = 10.0;
    const Ellipse e = ellipse_with_area(q.v_ref);
    // f = 50, bonus = 5 / (1 + 1) = 2.5
    CHECK(utility_pair(e, e, q) == Approx(52.5).epsilon(1e-12));
  }

  SECTION("bonus approaches alpha for vanishing intersections") {
    CHECK(pair_bonus_for_area(1e-12, p) == Approx(p.alpha).epsilon(1e-9));
    CHECK(pair_bonus_for_area(0.0, p) == 0.0);
  }

  SECTION("pair never scores below main, equality only when disjoint") {
    Rng rng(21);
    for (int i = 0; i < 200; ++i) {
      const double v_cap = rng.uniform(0.0, 50.0);
      const double f = utility_main_for_area(rng.uniform(0.0, 200.0), p);
      const double bonus = pair_bonus_for_area(v_cap, p);
      CHECK(f + bonus >= f);
      if (v_cap > 0.0) {
        CHECK(bonus > p.eps_min);
      }
    }
  }
}

TEST_CASE("cbba score has diminishing marginal gain") {
  CHECK(cbba_score(60.0, 0) == Approx(60.0));
  CHECK(cbba_score(60.0, 2) == Approx(20.0));

  const double seq[4] = {cbba_score(60.0, 0), cbba_score(60.0, 1),
                         cbba_score(60.0, 2), cbba_score(60.0, 3)};
  CHECK(seq[0] == Approx(60.0));
  CHECK(seq[1] == Approx(30.0));
  CHECK(seq[2] == Approx(20.0));
  CHECK(seq[3] == Approx(15.0));
  for (int i = 1; i < 4; ++i) CHECK(seq[i] < seq[i - 1]);

  Rng rng(3);
  for (int i = 0; i < 500; ++i) {
    const double u = rng.uniform(0.0, 100.0);
    const int n = static_cast<int>(rng.below(20));
    CHECK(cbba_score(u, n) >= cbba_score(u, n + 1));
  }
}
