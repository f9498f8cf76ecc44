#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "wkstab/abreu.hpp"
#include "wkstab/errors.hpp"
#include "wkstab/quad.hpp"

using namespace wkstab;

namespace {

Polytope interval(Rational a, Rational b) {
  return Polytope::from_halfspaces({AffineForm{{1}, -a}, AffineForm{{-1}, b}});
}

Polytope square2() {
  return Polytope::from_halfspaces({AffineForm{{1, 0}, Rational(1)}, AffineForm{{-1, 0}, Rational(1)},
                                    AffineForm{{0, 1}, Rational(1)}, AffineForm{{0, -1}, Rational(1)}});
}

WeightExpr one(int dim) { return WeightExpr::constant(dim, Rational(1)); }

}  // namespace

TEST_CASE("1D Guillemin potential closed form") {
  SymplecticPotential u = SymplecticPotential::guillemin(interval(Rational(-1), Rational(1)));
  for (double p : {-0.9, -0.3, 0.0, 0.4, 0.85}) {
    double expected_u = 0.5 * ((1 - p) * std::log(1 - p) + (1 + p) * std::log(1 + p));
    CHECK(u.u({p}) == doctest::Approx(expected_u).epsilon(1e-14));
    CHECK(u.hessian({p})[0][0] == doctest::Approx(1.0 / (1 - p * p)).epsilon(1e-14));
    CHECK(u.hessian_inverse({p})[0][0] == doctest::Approx(1 - p * p).epsilon(1e-14));
  }
  CHECK_THROWS_WITH_AS((void)u.u({1.0}), doctest::Contains("EvaluationOnBoundary"), Error);
}

TEST_CASE("2D square: H is diagonal 1-x^2, 1-y^2") {
  SymplecticPotential u = SymplecticPotential::guillemin(square2());
  for (auto [x, y] : {std::pair{0.2, -0.5}, {0.0, 0.0}, {-0.7, 0.3}}) {
    Matrix h = u.hessian_inverse({x, y});
    CHECK(h[0][0] == doctest::Approx(1 - x * x).epsilon(1e-13));
    CHECK(h[1][1] == doctest::Approx(1 - y * y).epsilon(1e-13));
    CHECK(std::abs(h[0][1]) <= 1e-13);
  }
}

TEST_CASE("Hessian positive definite at 100 random interior points") {
  SymplecticPotential u = SymplecticPotential::guillemin(square2());
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> coord(-0.98, 0.98);
  for (int i = 0; i < 100; ++i) {
    double x = coord(rng), y = coord(rng);
    Matrix g = u.hessian({x, y});
    CHECK(g[0][0] > 0);
    CHECK(g[0][0] * g[1][1] - g[0][1] * g[1][0] > 0);
  }
}

TEST_CASE("Scal_v with v=1 is 2 on the interval") {
  SymplecticPotential u = SymplecticPotential::guillemin(interval(Rational(-1), Rational(1)));
  for (double p = -0.9; p <= 0.9; p += 0.1) {
    CHECK(std::abs(scal_v(u, one(1), {p}) - 2.0) <= 1e-10);
    CHECK(std::abs(scal_v(u, one(1), {p}, ScalMethod::FiniteDifference) - 2.0) <= 1e-4);
  }
}

TEST_CASE("Scal_v with v=1 is 4 on the square") {
  SymplecticPotential u = SymplecticPotential::guillemin(square2());
  for (auto [x, y] : {std::pair{0.0, 0.0}, {0.5, -0.25}, {-0.8, 0.1}}) {
    CHECK(std::abs(scal_v(u, one(2), {x, y}) - 4.0) <= 1e-10);
    CHECK(std::abs(scal_v(u, one(2), {x, y}, ScalMethod::FiniteDifference) - 4.0) <= 1e-4);
  }
}

TEST_CASE("Scal_v with v=p+2 matches the exact polynomial oracle 6p+4") {
  // oracle: H = 1-p^2 exactly, so Scal_v = -((p+2)(1-p^2))'' computed in
  // exact polynomial arithmetic
  RationalPoly h = RationalPoly::univariate({Rational(1), Rational(0), Rational(-1)});
  RationalPoly v = RationalPoly::univariate({Rational(2), Rational(1)});
  RationalPoly oracle = -(v * h).derivative(0).derivative(0);
  CHECK(oracle.coefficients() == RatVec{Rational(4), Rational(6)});

  SymplecticPotential u = SymplecticPotential::guillemin(interval(Rational(-1), Rational(1)));
  WeightExpr vexpr = WeightExpr::parse("p1+2", 1);
  for (double p : {-0.5, 0.0, 0.3, 0.75}) {
    double expected = oracle(std::vector<double>{p});
    CHECK(scal_v(u, vexpr, {p}) == doctest::Approx(expected).epsilon(1e-11));
    CHECK(std::abs(scal_v(u, vexpr, {p}, ScalMethod::FiniteDifference) - expected) <= 1e-4);
  }
}

TEST_CASE("points too close to the boundary are rejected") {
  SymplecticPotential u = SymplecticPotential::guillemin(interval(Rational(-1), Rational(1)));
  CHECK_THROWS_WITH_AS((void)scal_v(u, one(1), {0.9999994}), doctest::Contains("TooCloseToBoundary"),
                       Error);
}

TEST_CASE("corrected potential keeps analytic derivatives") {
  // u0 + p^4/24 stays strictly convex on [-1,1]; G = 1/(1-p^2) + p^2/2
  Polytope seg = interval(Rational(-1), Rational(1));
  SymplecticPotential u = SymplecticPotential::guillemin_plus(seg, WeightExpr::parse("p1^4/24", 1));
  for (double p : {-0.6, 0.0, 0.5}) {
    double g = 1.0 / (1 - p * p) + p * p / 2.0;
    CHECK(u.hessian({p})[0][0] == doctest::Approx(g).epsilon(1e-13));
    // cross-check analytic Scal_v against the finite-difference path
    double analytic = scal_v(u, one(1), {p});
    double fd = scal_v(u, one(1), {p}, ScalMethod::FiniteDifference);
    CHECK(std::abs(analytic - fd) <= 1e-4);
  }
  CHECK_THROWS_WITH_AS(
      (void)SymplecticPotential::guillemin_plus(seg, WeightExpr::parse("0-p1^2", 1)),
      doctest::Contains("strict convexity"), Error);
}

TEST_CASE("integration-by-parts identity residuals") {
  Polytope seg = interval(Rational(-1), Rational(1));
  SymplecticPotential u = SymplecticPotential::guillemin(seg);

  // v=w=1, c=2, f=p^2: both sides vanish
  CHECK(check_futaki_identity(u, one(1), one(1), WeightExpr::parse("p1^2", 1),
                              Scalar::of(Rational(2))) <= 1e-6);

  // affine f: the correction term vanishes
  CHECK(check_futaki_identity(u, one(1), one(1), WeightExpr::parse("p1+1/2", 1),
                              Scalar::of(Rational(2))) <= 1e-6);

  // v=(p+2), w=1, f=p^2 with c = slope = 2*(v(1)+v(-1))/2 = 4
  CHECK(check_futaki_identity(u, WeightExpr::parse("p1+2", 1), one(1),
                              WeightExpr::parse("p1^2", 1), Scalar::of(Rational(4))) <= 1e-5);
}

TEST_CASE("shrunk total Scal_v integral converges to the boundary term") {
  // the identity with f=1: int_P Scal_v dp = 2 int_dP v dsigma
  for (bool square : {false, true}) {
    Polytope poly = square ? square2() : interval(Rational(-1), Rational(1));
    SymplecticPotential u = SymplecticPotential::guillemin(poly);
    WeightExpr v = one(poly.dim());
    double target = 2.0 * integrate_boundary(
                              poly, [&](const std::vector<double>& p) { return v.eval(p); }, 16);
    double prev = 1e18;
    for (Rational eps : {Rational(1, 100), Rational(1, 200), Rational(1, 400)}) {
      Polytope shrunk = poly.shrink(eps);
      double integral = integrate_interior(
          shrunk, [&](const std::vector<double>& p) { return scal_v(u, v, p); }, 16);
      double err = std::abs(integral - target);
      CHECK(err < prev);
      prev = err;
    }
  }
}

TEST_CASE("corrected potential on the square") {
  Polytope sq = square2();
  SymplecticPotential u =
      SymplecticPotential::guillemin_plus(sq, WeightExpr::parse("(p1^2*p2^2)/40", 2));
  for (auto [x, y] : {std::pair{0.0, 0.0}, {0.4, -0.3}, {-0.6, 0.5}}) {
    double analytic = scal_v(u, one(2), {x, y});
    double fd = scal_v(u, one(2), {x, y}, ScalMethod::FiniteDifference);
    CHECK(std::abs(analytic - fd) <= 1e-3 * std::max(1.0, std::abs(analytic)));
  }
}

TEST_CASE("2D integration-by-parts identity on the square") {
  // v = w = 1, c = 4, f = p1^2 + p2^2: both sides converge to 32/3 - 32/3 = 0
  Polytope sq = square2();
  SymplecticPotential u = SymplecticPotential::guillemin(sq);
  double residual = check_futaki_identity(u, one(2), one(2),
                                          WeightExpr::parse("p1^2+p2^2", 2), Scalar::of(Rational(4)));
  CHECK(residual <= 1e-5);
}
