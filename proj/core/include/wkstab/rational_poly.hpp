#pragma once

#include <map>
#include <optional>
#include <vector>

#include "wkstab/rational.hpp"

namespace wkstab {

// Multivariate polynomial with exact rational coefficients, keyed by exponent
// vectors. Zero coefficients are never stored.
class RationalPoly {
 public:
  using Monomial = std::vector<int>;

  explicit RationalPoly(int nvars = 1) : nvars_(nvars) {}

  static RationalPoly constant(int nvars, const Rational& c);
  static RationalPoly variable(int nvars, int index);
  // Univariate polynomial from ascending coefficients c0 + c1 x + ...
  static RationalPoly univariate(const RatVec& ascending);

  int nvars() const { return nvars_; }
  bool is_zero() const { return terms_.empty(); }
  int total_degree() const;
  int degree_in(int var) const;
  const std::map<Monomial, Rational>& terms() const { return terms_; }
  Rational coefficient(const Monomial& m) const;

  RationalPoly& operator+=(const RationalPoly& other);
  RationalPoly& operator-=(const RationalPoly& other);
  RationalPoly operator+(const RationalPoly& other) const;
  RationalPoly operator-(const RationalPoly& other) const;
  RationalPoly operator-() const;
  RationalPoly operator*(const RationalPoly& other) const;
  RationalPoly operator*(const Rational& scalar) const;
  RationalPoly pow(unsigned exponent) const;

  bool operator==(const RationalPoly& other) const {
    return nvars_ == other.nvars_ && terms_ == other.terms_;
  }

  RationalPoly derivative(int var) const;
  // Antiderivative in one variable, zero constant of integration.
  RationalPoly antiderivative(int var) const;

  Rational operator()(const RatVec& point) const;
  double operator()(const std::vector<double>& point) const;

  // Substitute each variable with a polynomial (all in the same target space).
  RationalPoly substitute(const std::vector<RationalPoly>& replacement) const;

  // Ascending univariate coefficient vector; requires nvars() == 1.
  RatVec coefficients() const;

  void add_term(Monomial m, const Rational& c);

 private:
  int nvars_;
  std::map<Monomial, Rational> terms_;
};

// --- univariate helpers on ascending coefficient vectors ------------------

namespace upoly {

RatVec trim(RatVec p);
int degree(const RatVec& p);  // -1 for the zero polynomial
Rational eval(const RatVec& p, const Rational& x);
double eval(const RatVec& p, double x);
RatVec derivative(const RatVec& p);
RatVec add(const RatVec& a, const RatVec& b);
RatVec multiply(const RatVec& a, const RatVec& b);
RatVec scale(const RatVec& a, const Rational& s);
// -remainder(a, b) chain ingredient: returns remainder of a / b.
RatVec remainder(RatVec a, const RatVec& b);
// Exact division; fails if the division leaves a remainder.
RatVec divide_exact(const RatVec& a, const RatVec& b);
RatVec gcd(RatVec a, RatVec b);  // monic gcd
RatVec square_free_part(const RatVec& p);

// Number of distinct real roots of p in the open interval (a, b).
// Endpoint roots are discounted exactly.
int count_roots_open(const RatVec& p, const Rational& a, const Rational& b);

}  // namespace upoly

}  // namespace wkstab
