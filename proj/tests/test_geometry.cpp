#include "radalloc/geometry.hpp"

#include "support/test_oracles.hpp"

#include <catch2/catch.hpp>

#include <cmath>
#include <numbers>

using namespace radalloc;

namespace {

Ellipse random_ellipse(Rng& rng) {
  return Ellipse(Vec2(rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0)),
                 testsupport::random_spd(rng, 0.6, 3.0),
                 rng.uniform(0.8, 2.0));
}

}  // namespace

TEST_CASE("measurement covariance matches the rotated polar model") {
  const PolarNoise noise{2.0, 0.01};

  SECTION("zero azimuth keeps range variance on x") {
    const Mat2 k = measurement_covariance(100.0, 0.0, noise);
    CHECK(k(0, 0) == Approx(4.0).margin(1e-12));
    CHECK(k(1, 1) == Approx(1.0).margin(1e-12));
    CHECK(k(0, 1) == Approx(0.0).margin(1e-12));
  }

  SECTION("quarter turn swaps the axes") {
    const Mat2 k = measurement_covariance(100.0, std::numbers::pi / 2, noise);
    CHECK(k(0, 0) == Approx(1.0).margin(1e-9));
    CHECK(k(1, 1) == Approx(4.0).margin(1e-9));
  }

  SECTION("45 degrees, against an explicit matrix product") {
    const double th = std::numbers::pi / 4;
    Mat2 rot;
    rot << std::cos(th), std::sin(th), -std::sin(th), std::cos(th);
    Mat2 diag = Mat2::Zero();
    diag(0, 0) = 4.0;
    diag(1, 1) = 1.0;  // (100 * 0.01)^2
    const Mat2 expected = rot * diag * rot.transpose();
    const Mat2 k = measurement_covariance(100.0, th, noise);
    CHECK((k - expected).norm() < 1e-12);
    CHECK(k(0, 0) == Approx(2.5));
    CHECK(k(0, 1) == Approx(-1.5));
    CHECK(k(1, 0) == Approx(-1.5));
    CHECK(k(1, 1) == Approx(2.5));
  }

  SECTION("result is symmetric positive definite for random inputs") {
    Rng rng(41);
    for (int i = 0; i < 200; ++i) {
      const double r = rng.uniform(1.0, 20000.0);
      const double th = rng.uniform(-4.0, 4.0);
      const Mat2 k = measurement_covariance(r, th, noise);
      CHECK(k(0, 1) == k(1, 0));
      CHECK(k.determinant() > 0.0);
      CHECK(k.trace() > 0.0);
    }
  }

  SECTION("invalid inputs are rejected") {
    CHECK_THROWS_AS(measurement_covariance(0.0, 0.0, noise), std::domain_error);
    CHECK_THROWS_AS(measurement_covariance(-1.0, 0.0, noise),
                    std::domain_error);
    CHECK_THROWS_AS(measurement_covariance(10.0, 0.0, PolarNoise{0.0, 0.01}),
                    std::domain_error);
    CHECK_THROWS_AS(measurement_covariance(10.0, 0.0, PolarNoise{1.0, -0.1}),
                    std::domain_error);
  }
}

TEST_CASE("ellipse area") {
  Mat2 shape = Mat2::Zero();
  shape(0, 0) = 4.0;
  shape(1, 1) = 1.0;
  CHECK(Ellipse(Vec2::Zero(), shape, 1.0).area() ==
        Approx(2.0 * std::numbers::pi));

  CHECK(Ellipse(Vec2::Zero(), Mat2::Identity(), 3.0).area() ==
        Approx(9.0 * std::numbers::pi));

  Mat2 rotated;
  rotated << 2.5, -1.5, -1.5, 2.5;  // rotation of diag(4, 1)
  CHECK(Ellipse(Vec2::Zero(), rotated, 1.0).area() ==
        Approx(2.0 * std::numbers::pi));

  Rng rng(7);
  for (int i = 0; i < 100; ++i) {
    CHECK(random_ellipse(rng).area() > 0.0);
  }
}

TEST_CASE("ellipse construction rejects invalid shapes") {
  Mat2 indefinite;
  indefinite << 1.0, 2.0, 2.0, 1.0;  // eigenvalues 3 and -1
  CHECK_THROWS_AS(Ellipse(Vec2::Zero(), indefinite, 1.0), std::domain_error);

  CHECK_THROWS_AS(Ellipse(Vec2::Zero(), Mat2::Identity(), 0.0),
                  std::domain_error);
  CHECK_THROWS_AS(Ellipse(Vec2::Zero(), Mat2::Identity(), -2.0),
                  std::domain_error);

  Mat2 sliver = Mat2::Zero();
  sliver(0, 0) = 1e14;
  sliver(1, 1) = 1.0;  // condition number 1e14
  CHECK_THROWS_AS(Ellipse(Vec2::Zero(), sliver, 1.0), std::domain_error);
}

TEST_CASE("round-off asymmetry in the shape input is absorbed") {
  Mat2 lopsided;
  lopsided << 4.0, 0.1, 0.1 + 1e-12, 1.0;
  const Ellipse e(Vec2::Zero(), lopsided, 1.0);
  CHECK(e.shape()(0, 1) == e.shape()(1, 0));
}

TEST_CASE("ellipse contains") {
  const Ellipse unit(Vec2::Zero(), Mat2::Identity(), 1.0);
  CHECK(unit.contains(Vec2(0.0, 0.0)));
  CHECK(unit.contains(Vec2(1.0, 0.0)));  // boundary inclusive
  CHECK_FALSE(unit.contains(Vec2(1.001, 0.0)));
}

TEST_CASE("intersection area basics") {
  const Ellipse unit(Vec2::Zero(), Mat2::Identity(), 1.0);

  SECTION("identical ellipses give the full area") {
    Rng rng(11);
    for (int i = 0; i < 20; ++i) {
      const Ellipse e = random_ellipse(rng);
      CHECK(intersection_area(e, e) == e.area());
    }
  }

  SECTION("distant ellipses are disjoint") {
    const Ellipse far(Vec2(1000.0, 0.0), Mat2::Identity(), 1.0);
    CHECK(intersection_area(unit, far) == 0.0);
  }

  SECTION("two unit circles one meter apart match the lens formula") {
    const Ellipse other(Vec2(1.0, 0.0), Mat2::Identity(), 1.0);
    const double lens = 2.0 * std::acos(0.5) - 0.5 * std::sqrt(3.0);
    CHECK(lens == Approx(1.2283696986).epsilon(1e-9));
    CHECK(intersection_area(unit, other) == Approx(lens).epsilon(0.005));
  }
}

TEST_CASE("intersection area properties") {
  Rng rng(101);

  SECTION("bit-identical under argument swap") {
    for (int i = 0; i < 100; ++i) {
      const Ellipse a = random_ellipse(rng);
      Ellipse b = random_ellipse(rng);
      CHECK(intersection_area(a, b) == intersection_area(b, a));
    }
  }

  SECTION("never exceeds the smaller area") {
    for (int i = 0; i < 200; ++i) {
      const Ellipse a = random_ellipse(rng);
      const Ellipse b = random_ellipse(rng);
      const double v = intersection_area(a, b);
      const double lim = std::min(a.area(), b.area());
      CHECK(v <= lim * (1.0 + 1e-9));
    }
  }

  SECTION("invariant under a common rotation") {
    for (int i = 0; i < 50; ++i) {
      const Ellipse a = random_ellipse(rng);
      Ellipse b(a.center() + Vec2(rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)),
                testsupport::random_spd(rng, 0.6, 3.0), rng.uniform(0.8, 2.0));
      const double base = intersection_area(a, b);
      if (base <= 0.0) continue;

      const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
      Mat2 rot;
      rot << std::cos(phi), -std::sin(phi), std::sin(phi), std::cos(phi);
      const Ellipse ra(rot * a.center(), rot * a.shape() * rot.transpose(),
                       a.scale());
      const Ellipse rb(rot * b.center(), rot * b.shape() * rot.transpose(),
                       b.scale());
      const double rotated = intersection_area(ra, rb);
      CHECK(rotated == Approx(base).epsilon(1e-6));
    }
  }

  SECTION("agrees with a Monte Carlo oracle") {
    Rng mc_rng(777);
    int tested = 0;
    while (tested < 20) {
      const Ellipse a = random_ellipse(rng);
      const Ellipse b(
          a.center() + Vec2(rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5)),
          testsupport::random_spd(rng, 0.6, 3.0), rng.uniform(0.8, 2.0));
      const double v = intersection_area(a, b);
      if (v < 0.05 * std::min(a.area(), b.area())) continue;
      const double mc = testsupport::mc_intersection_area(a, b, 300000, mc_rng);
      CHECK(v == Approx(mc).epsilon(0.03));
      ++tested;
    }
  }
}
