#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "wkstab/errors.hpp"
#include <doctest.h>

#include <cmath>
#include <random>

#include "wkstab/polytope.hpp"
#include "wkstab/quad.hpp"

using namespace wkstab;

namespace {

AffineForm label(IntVec n, Rational b) { return AffineForm{std::move(n), std::move(b)}; }

Polytope interval(Rational a, Rational b) {
  return Polytope::from_halfspaces({label({1}, -a), label({-1}, b)});
}

Polytope unit_square() {
  return Polytope::from_halfspaces(
      {label({1, 0}, 0), label({0, 1}, 0), label({-1, 0}, 1), label({0, -1}, 1)});
}

Polytope standard_simplex() {
  return Polytope::from_halfspaces({label({1, 0}, 0), label({0, 1}, 0), label({-1, -1}, 1)});
}

RationalPoly random_poly(int nvars, int max_total_degree, std::mt19937& rng) {
  std::uniform_int_distribution<int> coeff(-9, 9);
  RationalPoly p(nvars);
  RationalPoly::Monomial m(nvars, 0);
  auto rec = [&](auto&& self, int var, int budget) -> void {
    if (var == nvars) {
      p.add_term(m, Rational(coeff(rng)));
      return;
    }
    for (int e = 0; e <= budget; ++e) {
      m[static_cast<size_t>(var)] = e;
      self(self, var + 1, budget - e);
    }
    m[static_cast<size_t>(var)] = 0;
  };
  rec(rec, 0, max_total_degree);
  return p;
}

}  // namespace

TEST_CASE("gauss rule sanity") {
  const GaussRule& r = gauss_legendre(8);
  double sum = 0;
  for (double w : r.weights) sum += w;
  CHECK(sum == doctest::Approx(2.0).epsilon(1e-14));
  // integrates x^14 on [-1,1] exactly
  double val = 0;
  for (size_t i = 0; i < r.nodes.size(); ++i) val += r.weights[i] * std::pow(r.nodes[i], 14);
  CHECK(val == doctest::Approx(2.0 / 15.0).epsilon(1e-13));
}

TEST_CASE("interior integrals, hand values") {
  Polytope seg = interval(Rational(-1), Rational(1));
  CHECK(integrate_interior(seg, [](const std::vector<double>&) { return 1.0; }, 4) ==
        doctest::Approx(2.0).epsilon(1e-14));
  CHECK(integrate_interior(seg, [](const std::vector<double>& p) { return p[0] * p[0]; }, 2) ==
        doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(integrate_interior(unit_square(),
                           [](const std::vector<double>& p) { return p[0] * p[1]; }, 4) ==
        doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("boundary integrals, hand values") {
  auto one = [](const std::vector<double>&) { return 1.0; };
  CHECK(integrate_boundary(interval(Rational(-1), Rational(1)), one, 4) ==
        doctest::Approx(2.0).epsilon(1e-14));
  CHECK(integrate_boundary(unit_square(), one, 4) == doctest::Approx(4.0).epsilon(1e-14));
  // the diagonal contributes length sqrt(2) times density 1/sqrt(2)
  CHECK(integrate_boundary(standard_simplex(), one, 4) == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("exact polynomial integrals") {
  RationalPoly x2 = RationalPoly::univariate({Rational(0), Rational(0), Rational(1)});
  CHECK(integrate_exact_poly(interval(Rational(-1), Rational(1)), x2) == Rational(2, 3));

  RationalPoly xy = RationalPoly::variable(2, 0) * RationalPoly::variable(2, 1);
  CHECK(integrate_exact_poly(unit_square(), xy) == Rational(1, 4));

  // int_{-1}^{1} (p+2)^3 dp = (3^4 - 1)/4 = 20
  RationalPoly cubed = RationalPoly::univariate({Rational(2), Rational(1)}).pow(3);
  CHECK(integrate_exact_poly(interval(Rational(-1), Rational(1)), cubed) == Rational(20));
  CHECK(integrate_interval_exact(cubed, Rational(-1), Rational(1)) == Rational(20));
}

TEST_CASE("exact boundary polynomial integrals") {
  RationalPoly x = RationalPoly::variable(2, 0);
  // int over the square boundary of p1: edges p1=0 (0), p1=1 (1), and two edges with mean 1/2
  CHECK(integrate_boundary_exact_poly(unit_square(), x) == Rational(2));
  RationalPoly one1 = RationalPoly::constant(1, Rational(1));
  CHECK(integrate_boundary_exact_poly(interval(Rational(-1), Rational(1)), one1) == Rational(2));
  CHECK(integrate_boundary_exact_poly(standard_simplex(), RationalPoly::constant(2, Rational(1))) ==
        Rational(3));
}

TEST_CASE("float rule matches the exact oracle through degree 7 at order 4") {
  std::mt19937 rng(20240817);
  for (const Polytope& p : {interval(Rational(-1), Rational(1)), unit_square(), standard_simplex()}) {
    for (int rep = 0; rep < 5; ++rep) {
      RationalPoly q = random_poly(p.dim(), 7, rng);
      double exact = integrate_exact_poly(p, q).get_d();
      double numeric =
          integrate_interior(p, [&](const std::vector<double>& pt) { return q(pt); }, 4);
      double scale = std::max(1.0, std::abs(exact));
      CHECK(std::abs(numeric - exact) / scale <= 1e-12);
    }
  }
}

TEST_CASE("superalgebraic convergence for exp on [-1,1]") {
  Polytope seg = interval(Rational(-1), Rational(1));
  double target = std::exp(1.0) - std::exp(-1.0);
  double prev_err = 1e9;
  for (int order : {2, 4, 6, 8}) {
    double got = integrate_interior(seg, [](const std::vector<double>& p) { return std::exp(p[0]); },
                                    order);
    double err = std::abs(got - target);
    if (prev_err > 1e-14) CHECK(err < prev_err / 10.0);
    prev_err = err;
  }
  CHECK(prev_err <= 1e-14);
}

TEST_CASE("additivity under interval splits") {
  Polytope whole = interval(Rational(-1), Rational(1));
  Polytope left = interval(Rational(-1), Rational(1, 3));
  Polytope right = interval(Rational(1, 3), Rational(1));
  auto g = [](const std::vector<double>& p) { return std::exp(p[0]) + p[0] * p[0]; };
  double sum = integrate_interior(left, g, 16) + integrate_interior(right, g, 16);
  CHECK(sum == doctest::Approx(integrate_interior(whole, g, 16)).epsilon(1e-13));

  RationalPoly q = RationalPoly::univariate({Rational(1), Rational(-2), Rational(0), Rational(5)});
  CHECK(integrate_exact_poly(left, q) + integrate_exact_poly(right, q) ==
        integrate_exact_poly(whole, q));
}

TEST_CASE("non-finite integrands are reported") {
  Polytope seg = interval(Rational(0), Rational(1));
  Integrand nan_at_every_node = [](const std::vector<double>& p) { return 1.0 / (p[0] - p[0]); };
  auto run = [&] { return integrate_interior(seg, nan_at_every_node, 4); };
  CHECK_THROWS_WITH_AS((void)run(), doctest::Contains("NonFiniteIntegrand"), Error);
}

TEST_CASE("3D cube: interior integration through the generic triangulation") {
  Polytope cube = Polytope::from_halfspaces(
      {label({1, 0, 0}, Rational(0)), label({0, 1, 0}, Rational(0)), label({0, 0, 1}, Rational(0)),
       label({-1, 0, 0}, Rational(1)), label({0, -1, 0}, Rational(1)),
       label({0, 0, -1}, Rational(1))});
  RationalPoly xyz = RationalPoly::variable(3, 0) * RationalPoly::variable(3, 1) *
                     RationalPoly::variable(3, 2);
  CHECK(integrate_exact_poly(cube, RationalPoly::constant(3, Rational(1))) == Rational(1));
  CHECK(integrate_exact_poly(cube, xyz) == Rational(1, 8));
  double numeric = integrate_interior(cube, [&](const std::vector<double>& p) { return xyz(p); }, 4);
  CHECK(numeric == doctest::Approx(0.125).epsilon(1e-13));
}
