#pragma once

#include <functional>
#include <vector>

#include "wkstab/polytope.hpp"
#include "wkstab/rational_poly.hpp"

namespace wkstab {

using Integrand = std::function<double(const std::vector<double>&)>;

// Gauss-Legendre nodes/weights on [-1,1]; cached by order.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const GaussRule& gauss_legendre(int order);

// Nodes/weights on the reference d-simplex {u_i >= 0, sum u_i <= 1}.
// Conical product of Gauss-Legendre axes; weights sum to 1/d! and the rule is
// exact for polynomials of total degree <= 2*order-1.
struct SimplexRule {
  int dim;
  std::vector<std::vector<double>> nodes;
  std::vector<double> weights;
};
const SimplexRule& simplex_rule(int dim, int order);

// Interior integral over the polytope: centroid fan decomposition, mapped
// simplex rules, deterministic node order. Throws NonFiniteIntegrand when an
// evaluation is not finite.
double integrate_interior(const Polytope& poly, const Integrand& g, int order);

// Boundary integral against the dsigma facet measure (point masses in 1D).
double integrate_boundary(const Polytope& poly, const Integrand& g, int order);

// Single-facet contributions, same measure convention.
double integrate_facet(const Polytope& poly, const Facet& facet, const Integrand& g, int order);
Rational integrate_facet_exact_poly(const Polytope& poly, const Facet& facet, const RationalPoly& q);

// Exact counterparts for polynomial integrands.
Rational integrate_exact_poly(const Polytope& poly, const RationalPoly& q);
Rational integrate_boundary_exact_poly(const Polytope& poly, const RationalPoly& q);

// One interval [a,b], plain Gauss.
double integrate_interval(double a, double b, const std::function<double(double)>& g, int order);

// Exact integral of a univariate polynomial over [a,b].
Rational integrate_interval_exact(const RationalPoly& q, const Rational& a, const Rational& b);

inline constexpr int kDefaultOrder = 16;

}  // namespace wkstab
