#pragma once

#include <optional>
#include <vector>

#include "wkstab/polytope.hpp"
#include "wkstab/quad.hpp"
#include "wkstab/rational.hpp"
#include "wkstab/rational_poly.hpp"
#include "wkstab/weights.hpp"

namespace wkstab {

// A scalar with float value and, when the whole computation stayed rational,
// its exact counterpart.
struct Scalar {
  double value = 0;
  std::optional<Rational> exact;

  static Scalar of(const Rational& q) { return {q.get_d(), q}; }
};

// Evaluable weight with an optional exact polynomial route.
struct WeightFn {
  Integrand fn;
  std::optional<RationalPoly> poly;

  static WeightFn from(const WeightExpr& e);
  double operator()(const std::vector<double>& p) const { return fn(p); }
};

// Convex piecewise-affine f = max_j (<grad_j, p> + offset_j), rational data.
class PLConvex {
 public:
  struct Piece {
    RatVec grad;
    Rational offset;
    bool operator==(const Piece& other) const = default;
  };

  static PLConvex from_pieces(std::vector<Piece> pieces);
  static PLConvex affine(RatVec grad, Rational offset);

  int dim() const { return dim_; }
  const std::vector<Piece>& pieces() const { return pieces_; }

  double eval(const std::vector<double>& p) const;
  Rational eval(const RatVec& p) const;

  // Drops pieces whose active cell on the polytope has empty interior.
  PLConvex pruned_on(const Polytope& poly) const;

  // Subdivision of the polytope into the active cell of each kept piece.
  // Cell labels extend the polytope's labels, so facets inherited from the
  // boundary can be recognized by exact label equality.
  std::vector<std::pair<Piece, Polytope>> active_cells(const Polytope& poly) const;

 private:
  int dim_ = 1;
  std::vector<Piece> pieces_;
};

// Affine w_ext(p) = <xi, p> + c obtained by L^2_w projection.
struct ExtremalAffine {
  std::vector<double> xi;
  double c = 0;
  std::optional<RatVec> exact;  // coefficients (c, xi_1, ..) when the exact path ran
  double gram_condition = 0;
  double max_orthogonality_residual = 0;

  double eval(const std::vector<double>& p) const;
};

// c = 2 * (boundary integral of v) / (interior integral of w); the degenerate
// branch (vanishing denominator) returns 1.
Scalar slope(const Polytope& poly, const WeightExpr& v, const WeightExpr& w,
             int order = kDefaultOrder);

// F^P_{v,w}(f) = 2 int_{dP} f v dsigma - c int_P f w dp, integrated piecewise
// on the crease subdivision of f.
Scalar futaki(const Polytope& poly, const WeightExpr& v, const WeightExpr& w, const PLConvex& f,
              const Scalar& c, int order = kDefaultOrder);

ExtremalAffine solve_w_ext(const Polytope& poly, const WeightExpr& v, const WeightExpr& w,
                           int order = kDefaultOrder);

// futaki with weight w * w_ext and slope 1; vanishes on affine f.
Scalar relative_futaki(const Polytope& poly, const WeightExpr& v, const WeightExpr& w,
                       const PLConvex& f, int order = kDefaultOrder);

struct ScanGrid {
  long long direction_range = 2;  // entries of a in [-range, range] / den
  long long direction_den = 1;
  long long offset_range = 4;
  long long offset_den = 2;
};

struct ScanEntry {
  PLConvex f;
  Scalar value;
};

// Sweeps f = max(<a,p>+b, 0) over the grid, keeping creases that meet the
// interior; ascending by Futaki value.
std::vector<ScanEntry> scan_destabilizers(const Polytope& poly, const WeightExpr& v,
                                          const WeightExpr& w, const ScanGrid& grid,
                                          int order = kDefaultOrder, int threads = 1);

namespace internal {
// Pipeline cores that skip the positivity re-validation; jobs and sweeps call
// these after validating once.
Scalar slope_unchecked(const Polytope& poly, const WeightFn& v, const WeightFn& w, int order);
Scalar futaki_unchecked(const Polytope& poly, const WeightFn& v, const WeightFn& w,
                        const PLConvex& f, const Scalar& c, int order);
}  // namespace internal

}  // namespace wkstab
