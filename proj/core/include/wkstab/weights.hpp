#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "wkstab/polytope.hpp"
#include "wkstab/rational.hpp"
#include "wkstab/rational_poly.hpp"

namespace wkstab {

namespace detail {
struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;
}  // namespace detail

// A weight function on the momentum polytope: expression tree over p1..pl
// with exact rational literals, closed under symbolic differentiation.
class WeightExpr {
 public:
  // Grammar: expr := term (('+'|'-') term)*; term := factor (('*'|'/') factor)*;
  // factor := base ('^' signed-rational)?; base := number | 'p'index |
  // '(' expr ')' | ('exp'|'log') '(' expr ')'.
  static WeightExpr parse(const std::string& text, int dim);

  static WeightExpr constant(int dim, const Rational& c);
  // <xi, p> + a
  static WeightExpr affine(const RatVec& xi, const Rational& a);
  // (<xi, p> + a)^k, rational k
  static WeightExpr affine_power(const RatVec& xi, const Rational& a, const Rational& k);
  // e^{<xi, p>}
  static WeightExpr exponential(const RatVec& xi);
  static WeightExpr product(const std::vector<WeightExpr>& factors);

  int dim() const { return dim_; }

  double eval(const std::vector<double>& p) const;
  std::vector<double> eval_grad(const std::vector<double>& p) const;
  std::vector<std::vector<double>> eval_hess(const std::vector<double>& p) const;

  // Exact evaluation; disengaged when the tree contains exp/log or a
  // fractional power.
  std::optional<Rational> eval_rational(const RatVec& p) const;

  // Exact expanded polynomial when the tree has no exp/log and only
  // non-negative integer exponents (constants may divide).
  std::optional<RationalPoly> as_polynomial() const;

  WeightExpr derivative(int var) const;

  std::string to_string() const;

  WeightExpr operator+(const WeightExpr& other) const;
  WeightExpr operator-(const WeightExpr& other) const;
  WeightExpr operator*(const WeightExpr& other) const;

 private:
  WeightExpr(int dim, detail::ExprPtr root);
  void build_derivatives();

  int dim_ = 1;
  detail::ExprPtr root_;
  std::vector<detail::ExprPtr> grad_;
  std::vector<std::vector<detail::ExprPtr>> hess_;
};

// One base factor of the generalized Calabi fibration data.
struct CalabiFactor {
  int d = 1;            // complex dimension of the base factor
  Rational scal;        // its constant scalar curvature
  RatVec xi;            // <xi, p> + c must be positive on P
  Rational c;
};

// v = prod (<xi_j,p>+c_j)^{d_j};
// w = (<xi_0,p>+c_0) v - sum_j Scal_j v / (<xi_j,p>+c_j).
// When a polytope is supplied, positivity of every factor is checked at its
// vertices (affine => vertex check suffices); violation reports the factor.
std::pair<WeightExpr, WeightExpr> generalized_calabi_weights(
    const std::vector<CalabiFactor>& base, const RatVec& xi0, const Rational& c0,
    const Polytope* domain = nullptr);

// Dense-grid positivity of a weight over the polytope (1001 points in 1D,
// 101^2 in 2D, vertices always included). Domain errors count as failures.
bool is_positive_on(const WeightExpr& v, const Polytope& poly);

}  // namespace wkstab
