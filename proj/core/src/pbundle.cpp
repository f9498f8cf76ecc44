#include "wkstab/pbundle.hpp"

#include <cmath>

#include "wkstab/errors.hpp"
#include "wkstab/quad.hpp"

namespace wkstab {

namespace {

constexpr int kChebDegree = 512;  // 513 Chebyshev-Lobatto nodes

std::vector<double> cheb_nodes() {
  std::vector<double> x(kChebDegree + 1);
  for (int k = 0; k <= kChebDegree; ++k) x[static_cast<size_t>(k)] = std::cos(M_PI * k / kChebDegree);
  return x;
}

// Plain-series coefficients c_j with f = sum c_j T_j, from Lobatto samples.
std::vector<double> cheb_coefficients(const std::vector<double>& values) {
  const int n = kChebDegree;
  std::vector<double> coeffs(static_cast<size_t>(n) + 1, 0.0);
  for (int j = 0; j <= n; ++j) {
    double acc = 0.5 * (values[0] + (j % 2 == 0 ? values[static_cast<size_t>(n)]
                                                : -values[static_cast<size_t>(n)]));
    for (int k = 1; k < n; ++k) acc += values[static_cast<size_t>(k)] * std::cos(M_PI * j * k / n);
    coeffs[static_cast<size_t>(j)] = 2.0 * acc / n;
  }
  coeffs[0] *= 0.5;
  coeffs[static_cast<size_t>(n)] *= 0.5;
  return coeffs;
}

double cheb_eval(const std::vector<double>& coeffs, double x) {
  // Clenshaw
  double b1 = 0, b2 = 0;
  for (size_t j = coeffs.size(); j-- > 1;) {
    double b0 = 2.0 * x * b1 - b2 + coeffs[j];
    b2 = b1;
    b1 = b0;
  }
  return x * b1 - b2 + coeffs[0];
}

// Antiderivative with value 0 at z = -1.
// int T_0 = T_1, int T_1 = (T_0 + T_2)/4, int T_n = T_{n+1}/(2(n+1)) - T_{n-1}/(2(n-1)).
std::vector<double> cheb_antiderivative(const std::vector<double>& coeffs) {
  const size_t n = coeffs.size();
  std::vector<double> out(n + 1, 0.0);
  auto c = [&](size_t j) { return j < n ? coeffs[j] : 0.0; };
  out[1] = c(0) - 0.5 * c(2);
  for (size_t j = 2; j < n + 1; ++j)
    out[j] = (c(j - 1) - c(j + 1)) / (2.0 * static_cast<double>(j));
  double at_left = 0;
  for (size_t j = 1; j < out.size(); ++j) at_left += (j % 2 ? -out[j] : out[j]);
  out[0] = -at_left;
  return out;
}

std::vector<double> cheb_derivative(const std::vector<double>& coeffs) {
  const int n = static_cast<int>(coeffs.size()) - 1;
  std::vector<double> out(static_cast<size_t>(n) + 1, 0.0);
  // backward recurrence: d_{j-1} = d_{j+1} + 2 j c_j
  for (int j = n; j >= 1; --j) {
    double upper = (j + 1 <= n - 1) ? out[static_cast<size_t>(j + 1)] : 0.0;
    out[static_cast<size_t>(j - 1)] = upper + 2.0 * j * coeffs[static_cast<size_t>(j)];
  }
  out[0] *= 0.5;
  out.resize(static_cast<size_t>(n));
  if (out.empty()) out.push_back(0.0);
  return out;
}

}  // namespace

BundleFactor BundleFactor::make(int d, const Rational& scal, const Rational& xi,
                                const Rational& c) {
  BundleFactor f;
  f.d = d;
  f.scal = scal.get_d();
  f.scal_exact = scal;
  f.xi = xi;
  f.c = c;
  return f;
}

AdmissibleData::AdmissibleData(std::vector<BundleFactor> factors, WeightExpr v, WeightExpr w,
                               Polytope iv)
    : factors_(std::move(factors)), v_(std::move(v)), w_(std::move(w)), interval_(std::move(iv)) {
  u_ = RationalPoly::constant(1, Rational(1));
  for (const auto& factor : factors_) {
    RationalPoly lin = RationalPoly::univariate({factor.c, factor.xi});
    u_ = u_ * lin.pow(static_cast<unsigned>(factor.d));
  }
  for (const auto& factor : factors_) {
    RatVec lin = {factor.c, factor.xi};
    u_over_factor_.push_back(
        RationalPoly::univariate(upoly::divide_exact(u_.coefficients(), lin)));
  }
}

AdmissibleData AdmissibleData::create(std::vector<BundleFactor> factors, WeightExpr v,
                                      WeightExpr w) {
  Polytope iv = Polytope::from_halfspaces({AffineForm{{1}, Rational(1)}, AffineForm{{-1}, Rational(1)}});
  for (size_t j = 0; j < factors.size(); ++j) {
    if (factors[j].d < 1)
      fail(ErrorCode::SchemaError, "factor dimension must be a positive integer");
    Rational abs_xi = factors[j].xi < 0 ? Rational(-factors[j].xi) : factors[j].xi;
    if (!(factors[j].c > abs_xi))
      fail(ErrorCode::PositivityViolation,
           "factor " + std::to_string(j + 1) + ": xi z + c must be positive on [-1,1]");
  }
  if (!is_positive_on(v, iv))
    fail(ErrorCode::PositivityViolation, "v must be positive on [-1,1]");
  if (!is_positive_on(w, iv))
    fail(ErrorCode::PositivityViolation, "w must be positive on [-1,1]");
  return AdmissibleData(std::move(factors), std::move(v), std::move(w), std::move(iv));
}

double AdmissibleData::u_at(double z) const { return u_(std::vector<double>{z}); }

double AdmissibleData::source_at(double z) const {
  if (factors_.empty()) return 0.0;
  double sum = 0;
  for (size_t j = 0; j < factors_.size(); ++j)
    sum += factors_[j].scal * u_over_factor_[j](std::vector<double>{z});
  return v_.eval({z}) * sum;
}

std::optional<RationalPoly> AdmissibleData::source_poly() const {
  auto v_poly = v_.as_polynomial();
  if (!v_poly) return std::nullopt;
  RationalPoly sum(1);
  for (size_t j = 0; j < factors_.size(); ++j) {
    if (!factors_[j].scal_exact) return std::nullopt;
    sum += u_over_factor_[j] * *factors_[j].scal_exact;
  }
  return *v_poly * sum;
}

bool AdmissibleData::exact_capable() const {
  if (!v_.as_polynomial() || !w_.as_polynomial()) return false;
  for (const auto& factor : factors_)
    if (!factor.scal_exact) return false;
  return true;
}

RationalPoly u_poly(const AdmissibleData& data) { return data.u(); }

WExtCoefficients solve_w_ext_ode(const AdmissibleData& data, int order) {
  const WeightExpr& v = data.v();
  const WeightExpr& w = data.w();
  auto wu = [&](double t) { return w.eval({t}) * data.u_at(t); };
  auto source = [&](double t) { return data.source_at(t); };

  double vu_left = v.eval({-1.0}) * data.u_at(-1.0);
  double vu_right = v.eval({1.0}) * data.u_at(1.0);

  double m1 = integrate_interval(-1, 1, [&](double t) { return t * wu(t); }, order);
  double m0 = integrate_interval(-1, 1, [&](double t) { return wu(t); }, order);
  double n1 = integrate_interval(-1, 1, [&](double t) { return (1 - t) * t * wu(t); }, order);
  double n0 = integrate_interval(-1, 1, [&](double t) { return (1 - t) * wu(t); }, order);
  double s0 = integrate_interval(-1, 1, source, order);
  double s1 = integrate_interval(-1, 1, [&](double t) { return (1 - t) * source(t); }, order);

  std::vector<double> solution;
  if (!solve_linear({{m1, m0}, {n1, n0}}, {s0 + 2 * (vu_right + vu_left), s1 + 4 * vu_left},
                    solution))
    fail(ErrorCode::SingularSystem, "moment system for w_ext is singular");

  WExtCoefficients out;
  out.a1.value = solution[0];
  out.a2.value = solution[1];

  if (data.exact_capable()) {
    RationalPoly w_poly = *data.w().as_polynomial();
    RationalPoly v_poly = *data.v().as_polynomial();
    RationalPoly wu_poly = w_poly * data.u();
    RationalPoly s_poly = data.source_poly().value_or(RationalPoly(1));
    RationalPoly z = RationalPoly::variable(1, 0);
    RationalPoly one_minus = RationalPoly::constant(1, Rational(1)) - z;

    Rational a = Rational(-1), b = Rational(1);
    Rational vu_l = v_poly(RatVec{a}) * data.u()(RatVec{a});
    Rational vu_r = v_poly(RatVec{b}) * data.u()(RatVec{b});
    Rational M1 = integrate_interval_exact(z * wu_poly, a, b);
    Rational M0 = integrate_interval_exact(wu_poly, a, b);
    Rational N1 = integrate_interval_exact(one_minus * z * wu_poly, a, b);
    Rational N0 = integrate_interval_exact(one_minus * wu_poly, a, b);
    Rational S0 = integrate_interval_exact(s_poly, a, b);
    Rational S1 = integrate_interval_exact(one_minus * s_poly, a, b);
    RatVec sol;
    if (!solve_linear({{M1, M0}, {N1, N0}}, {S0 + 2 * (vu_r + vu_l), S1 + 4 * vu_l}, sol))
      fail(ErrorCode::SingularSystem, "moment system for w_ext is singular");
    out.a1.exact = sol[0];
    out.a2.exact = sol[1];
  }
  return out;
}

Scalar pbundle_slope(const AdmissibleData& data, int order) {
  double numerator = 2.0 * (data.v().eval({1.0}) * data.u_at(1.0) +
                            data.v().eval({-1.0}) * data.u_at(-1.0)) +
                     integrate_interval(-1, 1, [&](double z) { return data.source_at(z); }, order);
  double denominator = integrate_interval(
      -1, 1, [&](double z) { return data.w().eval({z}) * data.u_at(z); }, order);
  Scalar out;
  out.value = numerator / denominator;
  if (data.exact_capable()) {
    RationalPoly v_poly = *data.v().as_polynomial();
    RationalPoly w_poly = *data.w().as_polynomial();
    Rational a(-1), b(1);
    Rational num = 2 * (v_poly(RatVec{b}) * data.u()(RatVec{b}) +
                        v_poly(RatVec{a}) * data.u()(RatVec{a})) +
                   integrate_interval_exact(*data.source_poly(), a, b);
    Rational den = integrate_interval_exact(w_poly * data.u(), a, b);
    if (den == 0) fail(ErrorCode::SingularSystem, "slope denominator vanishes");
    out.exact = num / den;
  }
  return out;
}

ThetaSolution solve_theta(const AdmissibleData& data, const WExtCoefficients& wext, int order) {
  (void)order;
  ThetaSolution sol;
  sol.data_ = &data;
  sol.a1_ = wext.a1.value;
  sol.a2_ = wext.a2.value;
  sol.vu_left_ = data.v().eval({-1.0}) * data.u_at(-1.0);
  double vu_right = data.v().eval({1.0}) * data.u_at(1.0);

  if (data.exact_capable() && wext.a1.exact && wext.a2.exact) {
    RationalPoly w_poly = *data.w().as_polynomial();
    RationalPoly v_poly = *data.v().as_polynomial();
    RationalPoly z = RationalPoly::variable(1, 0);
    RationalPoly w_ext_poly = RationalPoly::univariate({*wext.a2.exact, *wext.a1.exact});
    RationalPoly t_poly = *data.source_poly() - w_poly * w_ext_poly * data.u();

    // phi = 2 v(-1)u(-1) (z+1) + z (F1(z) - F1(-1)) - (F2(z) - F2(-1)),
    // F1 = antiderivative(T), F2 = antiderivative(t T)
    RationalPoly f1 = t_poly.antiderivative(0);
    RationalPoly f2 = (z * t_poly).antiderivative(0);
    Rational f1_left = f1(RatVec{Rational(-1)});
    Rational f2_left = f2(RatVec{Rational(-1)});
    Rational vu_l = v_poly(RatVec{Rational(-1)}) * data.u()(RatVec{Rational(-1)});
    RationalPoly phi = (z + RationalPoly::constant(1, Rational(1))) * (2 * vu_l) +
                       z * (f1 - RationalPoly::constant(1, f1_left)) -
                       (f2 - RationalPoly::constant(1, f2_left));
    sol.phi_poly_ = phi;

    // exact boundary checks
    RationalPoly dphi = phi.derivative(0);
    Rational vu_r = v_poly(RatVec{Rational(1)}) * data.u()(RatVec{Rational(1)});
    Rational r0 = phi(RatVec{Rational(-1)});
    Rational r1 = phi(RatVec{Rational(1)});
    Rational r2 = dphi(RatVec{Rational(-1)}) - 2 * vu_l;
    Rational r3 = dphi(RatVec{Rational(1)}) + 2 * vu_r;
    sol.residuals_ = {std::abs(r0.get_d()), std::abs(r1.get_d()), std::abs(r2.get_d()),
                      std::abs(r3.get_d())};
  }

  // Chebyshev path (always built; it is the float pipeline)
  std::vector<double> nodes = cheb_nodes();
  std::vector<double> t_values(nodes.size()), zt_values(nodes.size());
  for (size_t i = 0; i < nodes.size(); ++i) {
    double zv = nodes[i];
    double t = data.source_at(zv) -
               data.w().eval({zv}) * (wext.a1.value * zv + wext.a2.value) * data.u_at(zv);
    t_values[i] = t;
    zt_values[i] = zv * t;
  }
  std::vector<double> t_coeffs = cheb_coefficients(t_values);
  std::vector<double> zt_coeffs = cheb_coefficients(zt_values);
  std::vector<double> f1 = cheb_antiderivative(t_coeffs);   // vanishes at -1
  std::vector<double> f2 = cheb_antiderivative(zt_coeffs);  // vanishes at -1

  // phi(z) = 2 vu(-1)(z+1) + z F1(z) - F2(z); sample and refit
  std::vector<double> phi_values(nodes.size());
  for (size_t i = 0; i < nodes.size(); ++i) {
    double zv = nodes[i];
    phi_values[i] = 2 * sol.vu_left_ * (zv + 1) + zv * cheb_eval(f1, zv) - cheb_eval(f2, zv);
  }
  sol.cheb_coeffs_ = cheb_coefficients(phi_values);
  sol.cheb_deriv_ = cheb_derivative(sol.cheb_coeffs_);

  if (!sol.phi_poly_) {
    // residuals from high-order Gauss moments of T: phi'(z) = 2 vu(-1) + int T,
    // phi(1) = 4 vu(-1) + int T - int tT; Chebyshev differentiation at the
    // endpoints would drown these in O(N^2 eps) noise
    auto t_fn = [&](double t) {
      return data.source_at(t) -
             data.w().eval({t}) * (wext.a1.value * t + wext.a2.value) * data.u_at(t);
    };
    double g1 = integrate_interval(-1, 1, t_fn, 64);
    double g2 = integrate_interval(-1, 1, [&](double t) { return t * t_fn(t); }, 64);
    sol.residuals_ = {std::abs(sol.phi(-1.0)), std::abs(4 * sol.vu_left_ + g1 - g2),
                      0.0, std::abs(2 * sol.vu_left_ + g1 + 2 * vu_right)};
  }
  for (double r : sol.residuals_)
    if (!(r <= 1e-10))
      fail(ErrorCode::SingularSystem, "profile boundary residual exceeds 1e-10");
  return sol;
}

double ThetaSolution::phi(double z) const {
  if (phi_poly_) return (*phi_poly_)(std::vector<double>{z});
  return cheb_eval(cheb_coeffs_, z);
}

double ThetaSolution::phi_prime(double z) const {
  if (phi_poly_) return phi_poly_->derivative(0)(std::vector<double>{z});
  return cheb_eval(cheb_deriv_, z);
}

double ThetaSolution::theta(double z) const {
  return phi(z) / (data_->v().eval({z}) * data_->u_at(z));
}

std::vector<double> ThetaSolution::phi_monomial_numeric(int degree) const {
  // T_0 = 1, T_1 = z, T_{n+1} = 2 z T_n - T_{n-1}; accumulate c_n T_n
  std::vector<double> result(static_cast<size_t>(degree) + 1, 0.0);
  std::vector<double> t_prev{1.0}, t_curr{0.0, 1.0};
  for (int n = 0; n <= degree; ++n) {
    const std::vector<double>& t_n = (n == 0) ? t_prev : t_curr;
    double c = n < static_cast<int>(cheb_coeffs_.size()) ? cheb_coeffs_[static_cast<size_t>(n)] : 0.0;
    for (size_t i = 0; i < t_n.size(); ++i) result[i] += c * t_n[i];
    if (n >= 1) {
      std::vector<double> t_next(t_curr.size() + 1, 0.0);
      for (size_t i = 0; i < t_curr.size(); ++i) t_next[i + 1] += 2.0 * t_curr[i];
      for (size_t i = 0; i < t_prev.size(); ++i) t_next[i] -= t_prev[i];
      t_prev = t_curr;
      t_curr = std::move(t_next);
    }
  }
  return result;
}

PositivityVerdict check_positivity(const AdmissibleData& data, const ThetaSolution& sol) {
  PositivityVerdict verdict;

  // interior grid: 2001 points strictly inside (-1,1)
  const int grid = 2001;
  double min_theta = std::numeric_limits<double>::infinity();
  double min_at = 0;
  std::vector<double> nonpositive;
  for (int i = 1; i <= grid; ++i) {
    double z = -1.0 + 2.0 * i / (grid + 1);
    double th = sol.theta(z);
    if (th < min_theta) {
      min_theta = th;
      min_at = z;
    }
    if (th <= 0) {
      if (nonpositive.empty() || z - nonpositive.back() > 5e-3) nonpositive.push_back(z);
    }
  }
  verdict.margin = min_theta;

  if (sol.phi_poly()) {
    // exact certificate: phi and Theta share interior zeros since v u > 0
    RatVec coeffs = sol.phi_poly()->coefficients();
    int roots = upoly::count_roots_open(coeffs, Rational(-1), Rational(1));
    Rational at_zero = (*sol.phi_poly())(RatVec{Rational(0)});
    verdict.exact_certificate = true;
    verdict.positive = roots == 0 && at_zero > 0;
    if (!verdict.positive) {
      verdict.nonpositive_at = nonpositive;
      if (verdict.nonpositive_at.empty()) verdict.nonpositive_at.push_back(min_at);
    }
    return verdict;
  }

  verdict.positive = min_theta > 0;
  if (!verdict.positive) {
    // polish each sign change by bisection
    std::vector<double> polished;
    double prev_z = -1.0 + 2.0 / (grid + 1);
    double prev_v = sol.theta(prev_z);
    for (int i = 2; i <= grid; ++i) {
      double z = -1.0 + 2.0 * i / (grid + 1);
      double value = sol.theta(z);
      if ((prev_v > 0) != (value > 0)) {
        double lo = prev_z, hi = z;
        for (int it = 0; it < 60; ++it) {
          double mid = 0.5 * (lo + hi);
          if ((sol.theta(mid) > 0) == (prev_v > 0)) lo = mid;
          else hi = mid;
        }
        polished.push_back(0.5 * (lo + hi));
      }
      prev_z = z;
      prev_v = value;
    }
    verdict.nonpositive_at = polished.empty() ? nonpositive : polished;
    if (verdict.nonpositive_at.empty()) verdict.nonpositive_at.push_back(min_at);
  }
  return verdict;
}

double futaki_z0(const AdmissibleData& data, const WExtCoefficients& wext, double z0, int order) {
  if (!(z0 > -1.0 && z0 < 1.0)) fail(ErrorCode::Z0OutOfRange, "z0 must lie in (-1,1)");

  auto integrand = [&](double z) {
    return data.source_at(z) -
           data.w().eval({z}) * (wext.a1.value * z + wext.a2.value) * data.u_at(z);
  };
  double vu_right = data.v().eval({1.0}) * data.u_at(1.0);
  double vu_left = data.v().eval({-1.0}) * data.u_at(-1.0);
  double f_right = 2.0 - z0;  // f_{z0}(1)
  double f_left = 1.0;        // f_{z0}(-1)

  double left = integrate_interval(-1.0, z0, integrand, order);
  double right =
      integrate_interval(z0, 1.0, [&](double z) { return (z + 1 - z0) * integrand(z); }, order);
  return 2.0 * (f_right * vu_right + f_left * vu_left) + left + right;
}

StabilityReport stability_report(const AdmissibleData& data, int order) {
  StabilityReport report;
  report.wext = solve_w_ext_ode(data, order);
  report.theta = solve_theta(data, report.wext, order);
  report.verdict = check_positivity(data, report.theta);

  for (int i = 1; i <= 99; ++i) {
    double z0 = -1.0 + 0.02 * i;
    double f = futaki_z0(data, report.wext, z0, order);
    report.futaki_curve.emplace_back(z0, f);
    double identity = data.v().eval({z0}) * data.u_at(z0) * report.theta.theta(z0);
    report.max_identity_residual =
        std::max(report.max_identity_residual, std::abs(f - identity));
  }

  if (report.verdict.positive) {
    report.conclusion = "extremal metric exists (Theta > 0 on (-1,1))";
  } else {
    std::string where = report.verdict.nonpositive_at.empty()
                            ? "unknown"
                            : std::to_string(report.verdict.nonpositive_at.front());
    report.conclusion = "K-semistability obstruction violated (Theta changes sign near z0 = " +
                        where + ")";
  }
  return report;
}

}  // namespace wkstab
