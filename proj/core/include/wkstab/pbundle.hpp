#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "wkstab/invariants.hpp"
#include "wkstab/rational_poly.hpp"
#include "wkstab/weights.hpp"

namespace wkstab {

// One cscK base factor of an admissible P^1-bundle: complex dimension d,
// constant scalar curvature Scal, and the positive affine function xi z + c
// on [-1,1].
struct BundleFactor {
  int d = 1;
  double scal = 0;
  std::optional<Rational> scal_exact;  // engaged when the input was rational
  Rational xi;
  Rational c;

  static BundleFactor make(int d, const Rational& scal, const Rational& xi, const Rational& c);
};

// Validated fibre data: factors plus weights v, w in the single variable z,
// both positive on [-1,1], with c_j > |xi_j| for every factor.
class AdmissibleData {
 public:
  static AdmissibleData create(std::vector<BundleFactor> factors, WeightExpr v, WeightExpr w);

  const std::vector<BundleFactor>& factors() const { return factors_; }
  const WeightExpr& v() const { return v_; }
  const WeightExpr& w() const { return w_; }
  const Polytope& interval() const { return interval_; }

  // u(z) = prod (xi_j z + c_j)^{d_j}, exact
  const RationalPoly& u() const { return u_; }
  double u_at(double z) const;

  // S(z) = v(z) u(z) sum_j Scal_j / (xi_j z + c_j)
  double source_at(double z) const;
  // exact polynomial S when v is polynomial and every Scal_j rational
  std::optional<RationalPoly> source_poly() const;

  bool exact_capable() const;

 private:
  AdmissibleData(std::vector<BundleFactor> factors, WeightExpr v, WeightExpr w, Polytope iv);

  std::vector<BundleFactor> factors_;
  WeightExpr v_, w_;
  Polytope interval_;
  RationalPoly u_;
  std::vector<RationalPoly> u_over_factor_;  // u / (xi_j z + c_j), exact
};

RationalPoly u_poly(const AdmissibleData& data);

// Coefficients of w_ext(z) = A1 z + A2 closing the profile ODE
// (v u Theta)'' = S - w w_ext u against the four boundary conditions.
struct WExtCoefficients {
  Scalar a1, a2;
};
WExtCoefficients solve_w_ext_ode(const AdmissibleData& data, int order = 32);

// Slope constant of the non-extremal profile equation
// (v u Theta)'' = S - c w u: c = (2[v u](1) + 2[v u](-1) + int S) / int w u.
Scalar pbundle_slope(const AdmissibleData& data, int order = 32);

// phi = v u Theta together with its boundary residuals.
class ThetaSolution {
 public:
  double phi(double z) const;
  double phi_prime(double z) const;
  double theta(double z) const;

  const std::optional<RationalPoly>& phi_poly() const { return phi_poly_; }
  const std::array<double, 4>& boundary_residuals() const { return residuals_; }
  double a1() const { return a1_; }
  double a2() const { return a2_; }

  // Monomial coefficients of the float (Chebyshev) pipeline, truncated at
  // the given degree; independent of the exact pipeline.
  std::vector<double> phi_monomial_numeric(int degree) const;

 private:
  friend ThetaSolution solve_theta(const AdmissibleData&, const WExtCoefficients&, int);
  std::optional<RationalPoly> phi_poly_;
  std::vector<double> cheb_coeffs_;  // Chebyshev series of phi on [-1,1]
  std::vector<double> cheb_deriv_;
  double a1_ = 0, a2_ = 0;
  double vu_left_ = 0;
  std::array<double, 4> residuals_{};
  const AdmissibleData* data_ = nullptr;
};

ThetaSolution solve_theta(const AdmissibleData& data, const WExtCoefficients& wext,
                          int order = 32);

struct PositivityVerdict {
  bool positive = false;
  bool exact_certificate = false;       // Sturm count on the exact polynomial
  std::vector<double> nonpositive_at;   // witnesses when not positive
  double margin = 0;                    // min of Theta over the interior grid
};
PositivityVerdict check_positivity(const AdmissibleData& data, const ThetaSolution& sol);

// F(z0) = 2[f(1)v(1)u(1) + f(-1)v(-1)u(-1)] + int f_{z0} (S - w w_ext u) dz
// with f_{z0}(z) = max(z + 1 - z0, 1), split at the crease z0.
double futaki_z0(const AdmissibleData& data, const WExtCoefficients& wext, double z0,
                 int order = 32);

struct StabilityReport {
  WExtCoefficients wext;
  ThetaSolution theta;
  PositivityVerdict verdict;
  std::vector<std::pair<double, double>> futaki_curve;  // (z0, F(z0)) on the 99-point grid
  double max_identity_residual = 0;                     // max |F(z0) - v u Theta(z0)|
  std::string conclusion;
};
StabilityReport stability_report(const AdmissibleData& data, int order = 32);

}  // namespace wkstab
