#pragma once

#include <optional>
#include <vector>

#include "wkstab/invariants.hpp"
#include "wkstab/polytope.hpp"
#include "wkstab/weights.hpp"

namespace wkstab {

using Matrix = std::vector<std::vector<double>>;

// Guillemin potential u0 = 1/2 sum_j L_j log L_j of a labelled polytope,
// optionally plus a smooth correction that keeps Hess(u) positive-definite.
// Hessian data is assembled analytically from the labels (and the symbolic
// derivatives of the correction).
class SymplecticPotential {
 public:
  static SymplecticPotential guillemin(Polytope poly);
  static SymplecticPotential guillemin_plus(Polytope poly, WeightExpr correction);

  const Polytope& domain() const { return domain_; }
  bool has_correction() const { return correction_.has_value(); }

  double u(const std::vector<double>& p) const;
  Matrix hessian(const std::vector<double>& p) const;          // G^u
  Matrix hessian_inverse(const std::vector<double>& p) const;  // H^u

  // dH/dp_k and d^2 H / dp_k dp_l, analytic.
  Matrix hessian_inverse_derivative(const std::vector<double>& p, int k) const;
  Matrix hessian_inverse_second_derivative(const std::vector<double>& p, int k, int l) const;

 private:
  explicit SymplecticPotential(Polytope poly) : domain_(std::move(poly)) {}
  void require_interior(const std::vector<double>& p) const;
  Matrix g_matrix(const std::vector<double>& p) const;
  Matrix g_derivative(const std::vector<double>& p, int k) const;
  Matrix g_second_derivative(const std::vector<double>& p, int k, int l) const;

  Polytope domain_;
  std::optional<WeightExpr> correction_;
  // symbolic third and fourth partials of the correction, indexed [i][j][k](,[l])
  std::vector<std::vector<std::vector<WeightExpr>>> correction_d3_;
  std::vector<std::vector<std::vector<std::vector<WeightExpr>>>> correction_d4_;
};

enum class ScalMethod { Analytic, FiniteDifference };

// Weighted Abreu formula Scal_v = -sum_ij (v H_ij)_{,ij} at an interior point.
// The finite-difference path uses 4th-order central stencils with step
// h = 1e-3 * inradius and requires that much room to the boundary.
double scal_v(const SymplecticPotential& potential, const WeightExpr& v,
              const std::vector<double>& p, ScalMethod method = ScalMethod::Analytic);

// | int_{P_eps}(Scal_v - c w) f dp - [F^P_{v,w}(f) - int_{P_eps} (sum H_ij f_,ij) v dp] |
// Richardson-extrapolated over eps in {1e-2, 5e-3, 2.5e-3}.
double check_futaki_identity(const SymplecticPotential& potential, const WeightExpr& v,
                             const WeightExpr& w, const WeightExpr& f, const Scalar& c,
                             int order = kDefaultOrder);

}  // namespace wkstab
