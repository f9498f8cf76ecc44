#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "wkstab/errors.hpp"
#include "wkstab/rational.hpp"
#include "wkstab/rational_poly.hpp"

using namespace wkstab;

TEST_CASE("rational literals parse exactly") {
  CHECK(rational_from_string("3") == Rational(3));
  CHECK(rational_from_string("-5/7") == Rational(-5, 7));
  CHECK(rational_from_string("1.25") == Rational(5, 4));
  CHECK(rational_from_string("-0.5") == Rational(-1, 2));
  CHECK(rational_from_string("2e2") == Rational(200));
  CHECK(rational_from_string("0.5e-1") == Rational(1, 20));
  CHECK(rational_from_string(" 7/2 ") == Rational(7, 2));
  CHECK_THROWS_AS(rational_from_string("1/0"), Error);
  CHECK_THROWS_AS(rational_from_string("abc"), Error);
  CHECK_THROWS_AS(rational_from_string(""), Error);
}

TEST_CASE("rational formatting is canonical") {
  CHECK(to_string(Rational(3)) == "3");
  CHECK(to_string(Rational(6, 4)) == "3/2");
  CHECK(to_string(Rational(-1, 3)) == "-1/3");
  CHECK(to_string(rational_from_string(to_string(Rational(22, 7)))) == "22/7");
}

TEST_CASE("exact linear solve") {
  std::vector<RatVec> a = {{Rational(2), Rational(2)}, {Rational(2), Rational(8, 3)}};
  RatVec rhs = {Rational(4), Rational(4)};
  RatVec x;
  REQUIRE(solve_linear(a, rhs, x));
  CHECK(x[0] == Rational(2));
  CHECK(x[1] == Rational(0));

  std::vector<RatVec> singular = {{Rational(1), Rational(2)}, {Rational(2), Rational(4)}};
  CHECK_FALSE(solve_linear(singular, rhs, x));
}

TEST_CASE("determinant and rank") {
  std::vector<RatVec> m = {{Rational(1), Rational(2)}, {Rational(3), Rational(4)}};
  CHECK(determinant(m) == Rational(-2));
  CHECK(rank(m) == 2);
  std::vector<RatVec> r1 = {{Rational(1), Rational(2)}, {Rational(2), Rational(4)}};
  CHECK(rank(r1) == 1);
}

TEST_CASE("polynomial arithmetic expands binomials") {
  // (x+2)^3 = 8 + 12x + 6x^2 + x^3
  RationalPoly p = RationalPoly::univariate({Rational(2), Rational(1)}).pow(3);
  CHECK(p.coefficients() == RatVec{Rational(8), Rational(12), Rational(6), Rational(1)});
}

TEST_CASE("polynomial calculus") {
  RationalPoly p = RationalPoly::univariate({Rational(0), Rational(0), Rational(1)});  // x^2
  CHECK(p.derivative(0).coefficients() == RatVec{Rational(0), Rational(2)});
  CHECK(p.antiderivative(0).coefficients() ==
        RatVec{Rational(0), Rational(0), Rational(0), Rational(1, 3)});
  CHECK(p(RatVec{Rational(3)}) == Rational(9));
  CHECK(p(std::vector<double>{3.0}) == doctest::Approx(9.0));
}

TEST_CASE("multivariate substitution") {
  // q(x,y) = x*y at x = s+t, y = s-t gives s^2 - t^2
  RationalPoly q = RationalPoly::variable(2, 0) * RationalPoly::variable(2, 1);
  RationalPoly s = RationalPoly::variable(2, 0), t = RationalPoly::variable(2, 1);
  RationalPoly composed = q.substitute({s + t, s - t});
  CHECK(composed == s * s - t * t);
}

TEST_CASE("univariate division, gcd, square-free part") {
  RatVec a = upoly::multiply({Rational(-1), Rational(1)}, {Rational(2), Rational(1)});  // (x-1)(x+2)
  CHECK(upoly::divide_exact(a, {Rational(-1), Rational(1)}) == RatVec{Rational(2), Rational(1)});
  CHECK(upoly::remainder(a, {Rational(-1), Rational(1)}).empty());
  CHECK_THROWS_AS(upoly::divide_exact(a, {Rational(1), Rational(1)}), Error);

  RatVec sq = upoly::multiply(a, a);
  RatVec g = upoly::gcd(sq, upoly::derivative(sq));
  CHECK(upoly::degree(g) == 2);
  RatVec sf = upoly::square_free_part(sq);
  CHECK(upoly::degree(sf) == 2);
  CHECK(upoly::eval(sf, Rational(1)) == 0);
  CHECK(upoly::eval(sf, Rational(-2)) == 0);
}

TEST_CASE("Sturm root counting on an interval") {
  // z^2 - 1/4 has two roots in (-1,1)
  RatVec p = {Rational(-1, 4), Rational(0), Rational(1)};
  CHECK(upoly::count_roots_open(p, Rational(-1), Rational(1)) == 2);

  // 1 - z^2 only vanishes at the endpoints
  RatVec q = {Rational(1), Rational(0), Rational(-1)};
  CHECK(upoly::count_roots_open(q, Rational(-1), Rational(1)) == 0);

  // z^3 - z: endpoint roots discounted, one interior root
  RatVec c = {Rational(0), Rational(-1), Rational(0), Rational(1)};
  CHECK(upoly::count_roots_open(c, Rational(-1), Rational(1)) == 1);

  // a double root still counts once
  RatVec d = upoly::multiply({Rational(-1, 3), Rational(1)}, {Rational(-1, 3), Rational(1)});
  CHECK(upoly::count_roots_open(d, Rational(0), Rational(1)) == 1);

  // no roots at all
  RatVec e = {Rational(1), Rational(0), Rational(1)};
  CHECK(upoly::count_roots_open(e, Rational(-10), Rational(10)) == 0);
}
