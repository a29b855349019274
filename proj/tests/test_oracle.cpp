#include "radalloc/oracle.hpp"

#include "support/test_oracles.hpp"

#include <catch2/catch.hpp>

using namespace radalloc;

namespace {

ProblemInstance small_instance() {
  ProblemInstance inst;
  inst.radars = {0, 1};
  inst.budgets = {{0, 4.0}, {1, 4.0}};
  inst.targets = {0};
  inst.utilities_main[{0, 0}] = 60.0;
  inst.utilities_main[{1, 0}] = 40.0;
  inst.costs[{0, 0}] = 1.0;
  inst.costs[{1, 0}] = 1.0;
  return inst;
}

}  // namespace

TEST_CASE("solve_p1 basics") {
  SECTION("one radar with enough budget takes everything") {
    ProblemInstance inst;
    inst.radars = {0};
    inst.budgets[0] = 10.0;
    double sum = 0.0;
    for (TargetId j = 0; j < 5; ++j) {
      inst.targets.push_back(j);
      inst.utilities_main[{0, j}] = 10.0 + j;
      inst.costs[{0, j}] = 1.0;
      sum += 10.0 + j;
    }
    const Assignment a = solve_p1(inst);
    CHECK(a.main.size() == 5);
    CHECK(a.total_utility == Approx(sum));
    CHECK(evaluate(inst, a).feasible);
  }

  SECTION("the better radar wins a single target") {
    const Assignment a = solve_p1(small_instance());
    CHECK(a.main_of(0) == 0);
    CHECK(a.total_utility == Approx(60.0));
  }

  SECTION("budget binding selects the best subset") {
    ProblemInstance inst;
    inst.radars = {0};
    inst.budgets[0] = 1.0;
    inst.targets = {0, 1};
    inst.utilities_main[{0, 0}] = 60.0;
    inst.utilities_main[{0, 1}] = 40.0;
    inst.costs[{0, 0}] = inst.costs[{0, 1}] = 1.0;
    const Assignment a = solve_p1(inst);
    CHECK(a.main.size() == 1);
    CHECK(a.main_of(0) == 0);
    CHECK(a.main_of(1) == kNoRadar);
  }

  SECTION("matches exhaustive enumeration on random instances") {
    Rng rng(17);
    for (int i = 0; i < 300; ++i) {
      const auto inst = testsupport::random_instance(
          rng, 1 + static_cast<int>(rng.below(3)),
          1 + static_cast<int>(rng.below(5)), 2.0, 1.0, false);
      const Assignment bb = solve_p1(inst);
      const Assignment bf = testsupport::brute_force_p1(inst);
      CHECK(bb.total_utility == bf.total_utility);
      CHECK(bb.main == bf.main);
      CHECK(evaluate(inst, bb).feasible);
    }
  }

  SECTION("oversize instances are a capacity error") {
    ProblemInstance inst;
    for (RadarId i = 0; i < 7; ++i) {
      inst.radars.push_back(i);
      inst.budgets[i] = 1.0;
    }
    inst.targets = {0};
    CHECK_THROWS_AS(solve_p1(inst), CapacityError);
  }
}

TEST_CASE("solve_p2 basics") {
  SECTION("zero pairing bonus reduces to the mono-sensor optimum") {
    Rng rng(23);
    for (int i = 0; i < 50; ++i) {
      auto inst = testsupport::random_instance(rng, 3, 4, 2.0, 1.0, false);
      // Pairs that add exactly nothing.
      for (RadarId a : inst.radars) {
        for (RadarId b : inst.radars) {
          if (a == b) continue;
          for (TargetId j : inst.targets) {
            if (const double* c = inst.main_utility(a, j)) {
              if (inst.main_utility(b, j)) inst.utilities_pair[{a, b, j}] = *c;
            }
          }
        }
      }
      CHECK(solve_p2(inst).total_utility == Approx(solve_p1(inst).total_utility));
    }
  }

  SECTION("a strictly better pair is chosen when budgets allow") {
    ProblemInstance inst = small_instance();
    inst.utilities_pair[{0, 1, 0}] = 62.5;  // 60 + 2.5 bonus
    const Assignment a = solve_p2(inst);
    CHECK(a.main_of(0) == 0);
    CHECK(a.optional_of(0) == 1);
    CHECK(a.total_utility == Approx(62.5));
  }

  SECTION("matches exhaustive enumeration on random instances") {
    Rng rng(29);
    for (int i = 0; i < 200; ++i) {
      const auto inst = testsupport::random_instance(
          rng, 1 + static_cast<int>(rng.below(3)),
          1 + static_cast<int>(rng.below(4)), 2.0, 1.0, true);
      const Assignment bb = solve_p2(inst);
      const Assignment bf = testsupport::brute_force_p2(inst);
      CHECK(bb.total_utility == bf.total_utility);
      CHECK(bb.main == bf.main);
      CHECK(bb.optional == bf.optional);
      CHECK(evaluate(inst, bb).feasible);
    }
  }

  SECTION("p2 optimum dominates p1") {
    Rng rng(31);
    for (int i = 0; i < 100; ++i) {
      const auto inst = testsupport::random_instance(rng, 3, 5, 2.0, 1.0, true);
      CHECK(solve_p2(inst).total_utility >=
            solve_p1(inst).total_utility - 1e-9);
    }
  }
}

TEST_CASE("evaluate") {
  const ProblemInstance inst = small_instance();

  SECTION("empty assignment is feasible and worthless") {
    const auto res = evaluate(inst, Assignment{});
    CHECK(res.utility == 0.0);
    CHECK(res.feasible);
    CHECK(res.violations.empty());
  }

  SECTION("over budget names the constraint and the radar") {
    ProblemInstance tight = small_instance();
    tight.budgets[0] = 1.0;
    tight.targets = {0, 1};
    tight.utilities_main[{0, 1}] = 10.0;
    tight.costs[{0, 1}] = 1.0;
    Assignment a;
    a.main[0] = 0;
    a.main[1] = 0;
    const auto res = evaluate(tight, a);
    CHECK_FALSE(res.feasible);
    REQUIRE(res.violations.size() == 1);
    CHECK(res.violations[0].find("(L)") != std::string::npos);
    CHECK(res.violations[0].find("0") != std::string::npos);
  }

  SECTION("optional without main is infeasible") {
    Assignment a;
    a.optional[0] = 1;
    CHECK_FALSE(evaluate(inst, a).feasible);
  }

  SECTION("same radar in both roles is infeasible") {
    ProblemInstance inst2 = small_instance();
    inst2.utilities_pair[{0, 1, 0}] = 61.0;
    Assignment a;
    a.main[0] = 0;
    a.optional[0] = 0;
    CHECK_FALSE(evaluate(inst2, a).feasible);
  }
}

TEST_CASE("optimum is monotone in targets and budget") {
  Rng rng(37);
  for (int i = 0; i < 50; ++i) {
    auto inst = testsupport::random_instance(rng, 3, 5, 2.0, 1.0, false);
    const double base = solve_p1(inst).total_utility;

    auto fewer = inst;
    const TargetId dropped = fewer.targets.back();
    fewer.targets.pop_back();
    for (RadarId r : fewer.radars) {
      fewer.utilities_main.erase({r, dropped});
      fewer.costs.erase({r, dropped});
    }
    CHECK(solve_p1(fewer).total_utility <= base + 1e-9);

    auto richer = inst;
    for (auto& [id, b] : richer.budgets) b += 1.0;
    CHECK(solve_p1(richer).total_utility >= base - 1e-9);
  }
}
