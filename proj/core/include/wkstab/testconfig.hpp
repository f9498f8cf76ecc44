#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wkstab/invariants.hpp"
#include "wkstab/polytope.hpp"
#include "wkstab/weights.hpp"

namespace wkstab {

// Toric test configuration: base polytope P, convex PL function f with
// rational data, cap R with f <= R, and the lifted polytope
// Q = {(p, p') : p in P, 0 <= p' <= R - f(p)}.
struct ToricTestConfig {
  Polytope base;
  PLConvex f;
  Rational cap;
  Polytope lifted;
};

ToricTestConfig build_config(const Polytope& base, const PLConvex& f, const Rational& cap);

// W_v(k) = sum over kP cap Z^l of (R - f)(lambda/k) v(lambda/k).
// Exact whenever v evaluates rationally (polynomials and rational functions).
Scalar weight_sum(const Polytope& base, const PLConvex& f, const Rational& cap,
                  const WeightExpr& v, int k);

// Least-squares fit W ~ a0 k^n + a1 k^(n-1) + a2 k^(n-2); the k^(n-2)
// coefficient is reported as the residual of the two-term model.
struct ExpansionFit {
  Scalar a0, a1, residual;
};
ExpansionFit fit_expansion(const std::vector<std::pair<int, Scalar>>& series, int n);

// Multiples of the least common denominator of the crease coordinates of f
// on the base interval/polytope, so PL sums split exactly at the creases.
std::vector<int> default_klist(const Polytope& base, const PLConvex& f);

struct DonaldsonFutakiReport {
  std::vector<std::pair<int, Scalar>> v_series, w_series;
  ExpansionFit v_fit, w_fit;
  Scalar a_v0, a_v1, a_w0;
  Scalar c;         // (v,w)-slope of the base
  Scalar df;        // a_v1 - (c/4) a_w0
  Scalar f_p;       // polytope Futaki invariant of f
  std::optional<Scalar> ratio;  // df / f_p when f_p != 0
  std::string note;
};

DonaldsonFutakiReport donaldson_futaki(const Polytope& base, const PLConvex& f,
                                       const Rational& cap, const WeightExpr& v,
                                       const WeightExpr& w, const std::vector<int>& klist,
                                       int order = kDefaultOrder, int threads = 1);

}  // namespace wkstab
