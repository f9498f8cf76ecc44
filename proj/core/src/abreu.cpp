#include "wkstab/abreu.hpp"

#include <cmath>

#include "wkstab/errors.hpp"
#include "wkstab/quad.hpp"

namespace wkstab {

namespace {

Matrix zero_matrix(int n) { return Matrix(static_cast<size_t>(n), std::vector<double>(static_cast<size_t>(n), 0.0)); }

Matrix invert(const Matrix& m) {
  const int n = static_cast<int>(m.size());
  Matrix inv = zero_matrix(n);
  for (int c = 0; c < n; ++c) {
    std::vector<double> e(static_cast<size_t>(n), 0.0);
    e[static_cast<size_t>(c)] = 1.0;
    std::vector<double> col;
    if (!solve_linear(m, e, col))
      fail(ErrorCode::DomainError, "symplectic potential Hessian is singular");
    for (int r = 0; r < n; ++r) inv[static_cast<size_t>(r)][static_cast<size_t>(c)] = col[static_cast<size_t>(r)];
  }
  return inv;
}

Matrix multiply(const Matrix& a, const Matrix& b) {
  const int n = static_cast<int>(a.size());
  Matrix out = zero_matrix(n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      double aik = a[static_cast<size_t>(i)][static_cast<size_t>(k)];
      if (aik == 0) continue;
      for (int j = 0; j < n; ++j)
        out[static_cast<size_t>(i)][static_cast<size_t>(j)] += aik * b[static_cast<size_t>(k)][static_cast<size_t>(j)];
    }
  return out;
}

Matrix add(Matrix a, const Matrix& b) {
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < a.size(); ++j) a[i][j] += b[i][j];
  return a;
}

Matrix negate(Matrix a) {
  for (auto& row : a)
    for (auto& x : row) x = -x;
  return a;
}

bool positive_definite(const Matrix& m) {
  // leading principal minors, small dimensions only
  Matrix a = m;
  const int n = static_cast<int>(a.size());
  for (int k = 0; k < n; ++k) {
    if (a[static_cast<size_t>(k)][static_cast<size_t>(k)] <= 0) return false;
    for (int i = k + 1; i < n; ++i) {
      double f = a[static_cast<size_t>(i)][static_cast<size_t>(k)] / a[static_cast<size_t>(k)][static_cast<size_t>(k)];
      for (int j = k; j < n; ++j)
        a[static_cast<size_t>(i)][static_cast<size_t>(j)] -= f * a[static_cast<size_t>(k)][static_cast<size_t>(j)];
    }
  }
  return true;
}

}  // namespace

SymplecticPotential SymplecticPotential::guillemin(Polytope poly) {
  return SymplecticPotential(std::move(poly));
}

SymplecticPotential SymplecticPotential::guillemin_plus(Polytope poly, WeightExpr correction) {
  SymplecticPotential out(std::move(poly));
  const int dim = out.domain_.dim();
  if (correction.dim() != dim)
    fail(ErrorCode::DimensionMismatch, "correction dimension does not match the polytope");
  out.correction_ = correction;

  out.correction_d3_.resize(static_cast<size_t>(dim));
  out.correction_d4_.resize(static_cast<size_t>(dim));
  for (int i = 0; i < dim; ++i) {
    WeightExpr di = correction.derivative(i);
    out.correction_d3_[static_cast<size_t>(i)].resize(static_cast<size_t>(dim));
    out.correction_d4_[static_cast<size_t>(i)].resize(static_cast<size_t>(dim));
    for (int j = 0; j < dim; ++j) {
      WeightExpr dij = di.derivative(j);
      out.correction_d4_[static_cast<size_t>(i)][static_cast<size_t>(j)].resize(static_cast<size_t>(dim));
      for (int k = 0; k < dim; ++k) {
        WeightExpr dijk = dij.derivative(k);
        out.correction_d3_[static_cast<size_t>(i)][static_cast<size_t>(j)].push_back(dijk);
        for (int l = 0; l < dim; ++l)
          out.correction_d4_[static_cast<size_t>(i)][static_cast<size_t>(j)][static_cast<size_t>(k)]
              .push_back(dijk.derivative(l));
      }
    }
  }

  // numeric strict-convexity check on the interior grid
  auto [lo_r, hi_r] = out.domain_.bounding_box();
  auto lo = to_doubles(lo_r), hi = to_doubles(hi_r);
  int per_axis = dim == 1 ? 101 : 21;
  std::vector<int> idx(static_cast<size_t>(dim), 0);
  std::vector<double> p(static_cast<size_t>(dim));
  while (true) {
    for (int i = 0; i < dim; ++i)
      p[static_cast<size_t>(i)] = lo[static_cast<size_t>(i)] +
                                  (hi[static_cast<size_t>(i)] - lo[static_cast<size_t>(i)]) *
                                      (idx[static_cast<size_t>(i)] + 0.5) / per_axis;
    bool interior = true;
    for (const auto& label : out.domain_.labels())
      if (label.eval(p) <= 1e-9) interior = false;
    if (interior && !positive_definite(out.g_matrix(p)))
      fail(ErrorCode::DomainError, "correction breaks strict convexity of the potential");
    int axis = dim - 1;
    while (axis >= 0) {
      if (++idx[static_cast<size_t>(axis)] < per_axis) break;
      idx[static_cast<size_t>(axis)] = 0;
      --axis;
    }
    if (axis < 0) break;
  }
  return out;
}

void SymplecticPotential::require_interior(const std::vector<double>& p) const {
  for (const auto& label : domain_.labels())
    if (label.eval(p) <= 0)
      fail(ErrorCode::EvaluationOnBoundary, "symplectic potential needs an interior point");
}

double SymplecticPotential::u(const std::vector<double>& p) const {
  require_interior(p);
  double total = 0;
  for (const auto& label : domain_.labels()) {
    double lv = label.eval(p);
    total += 0.5 * lv * std::log(lv);
  }
  if (correction_) total += correction_->eval(p);
  return total;
}

Matrix SymplecticPotential::g_matrix(const std::vector<double>& p) const {
  require_interior(p);
  const int n = domain_.dim();
  Matrix g = zero_matrix(n);
  for (const auto& label : domain_.labels()) {
    double inv = 0.5 / label.eval(p);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        g[static_cast<size_t>(i)][static_cast<size_t>(j)] +=
            inv * static_cast<double>(label.normal[static_cast<size_t>(i)]) *
            static_cast<double>(label.normal[static_cast<size_t>(j)]);
  }
  if (correction_) g = add(std::move(g), correction_->eval_hess(p));
  return g;
}

Matrix SymplecticPotential::g_derivative(const std::vector<double>& p, int k) const {
  const int n = domain_.dim();
  Matrix g = zero_matrix(n);
  for (const auto& label : domain_.labels()) {
    double lv = label.eval(p);
    double factor = -0.5 * static_cast<double>(label.normal[static_cast<size_t>(k)]) / (lv * lv);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        g[static_cast<size_t>(i)][static_cast<size_t>(j)] +=
            factor * static_cast<double>(label.normal[static_cast<size_t>(i)]) *
            static_cast<double>(label.normal[static_cast<size_t>(j)]);
  }
  if (correction_)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        g[static_cast<size_t>(i)][static_cast<size_t>(j)] +=
            correction_d3_[static_cast<size_t>(i)][static_cast<size_t>(j)][static_cast<size_t>(k)].eval(p);
  return g;
}

Matrix SymplecticPotential::g_second_derivative(const std::vector<double>& p, int k, int l) const {
  const int n = domain_.dim();
  Matrix g = zero_matrix(n);
  for (const auto& label : domain_.labels()) {
    double lv = label.eval(p);
    double factor = static_cast<double>(label.normal[static_cast<size_t>(k)]) *
                    static_cast<double>(label.normal[static_cast<size_t>(l)]) / (lv * lv * lv);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        g[static_cast<size_t>(i)][static_cast<size_t>(j)] +=
            factor * static_cast<double>(label.normal[static_cast<size_t>(i)]) *
            static_cast<double>(label.normal[static_cast<size_t>(j)]);
  }
  if (correction_)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        g[static_cast<size_t>(i)][static_cast<size_t>(j)] +=
            correction_d4_[static_cast<size_t>(i)][static_cast<size_t>(j)][static_cast<size_t>(k)]
                          [static_cast<size_t>(l)].eval(p);
  return g;
}

Matrix SymplecticPotential::hessian(const std::vector<double>& p) const { return g_matrix(p); }

Matrix SymplecticPotential::hessian_inverse(const std::vector<double>& p) const {
  return invert(g_matrix(p));
}

Matrix SymplecticPotential::hessian_inverse_derivative(const std::vector<double>& p, int k) const {
  Matrix h = hessian_inverse(p);
  return negate(multiply(multiply(h, g_derivative(p, k)), h));
}

Matrix SymplecticPotential::hessian_inverse_second_derivative(const std::vector<double>& p, int k,
                                                              int l) const {
  Matrix h = hessian_inverse(p);
  Matrix gk = g_derivative(p, k);
  Matrix hl = negate(multiply(multiply(h, g_derivative(p, l)), h));
  Matrix gkl = g_second_derivative(p, k, l);
  // d_l (-H Gk H) = -(Hl Gk H + H Gkl H + H Gk Hl)
  Matrix term = add(multiply(multiply(hl, gk), h), multiply(multiply(h, gkl), h));
  term = add(std::move(term), multiply(multiply(h, gk), hl));
  return negate(std::move(term));
}

namespace {

double scal_v_analytic(const SymplecticPotential& potential, const WeightExpr& v,
                       const std::vector<double>& p) {
  const int n = potential.domain().dim();
  double value = v.eval(p);
  auto grad = v.eval_grad(p);
  auto hess = v.eval_hess(p);
  Matrix h = potential.hessian_inverse(p);

  std::vector<Matrix> dh;
  dh.reserve(static_cast<size_t>(n));
  for (int k = 0; k < n; ++k) dh.push_back(potential.hessian_inverse_derivative(p, k));

  double total = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      Matrix d2h = potential.hessian_inverse_second_derivative(p, i, j);
      total += hess[static_cast<size_t>(i)][static_cast<size_t>(j)] * h[static_cast<size_t>(i)][static_cast<size_t>(j)];
      total += grad[static_cast<size_t>(i)] * dh[static_cast<size_t>(j)][static_cast<size_t>(i)][static_cast<size_t>(j)];
      total += grad[static_cast<size_t>(j)] * dh[static_cast<size_t>(i)][static_cast<size_t>(i)][static_cast<size_t>(j)];
      total += value * d2h[static_cast<size_t>(i)][static_cast<size_t>(j)];
    }
  }
  return -total;
}

double scal_v_fd(const SymplecticPotential& potential, const WeightExpr& v,
                 const std::vector<double>& p, double h) {
  const int n = potential.domain().dim();
  auto product_entry = [&](const std::vector<double>& q, int i, int j) {
    return v.eval(q) * potential.hessian_inverse(q)[static_cast<size_t>(i)][static_cast<size_t>(j)];
  };
  // 4th-order second derivative along one axis
  auto second = [&](int i, int j, int axis) {
    auto at = [&](double step) {
      std::vector<double> q = p;
      q[static_cast<size_t>(axis)] += step;
      return product_entry(q, i, j);
    };
    return (-at(2 * h) + 16 * at(h) - 30 * at(0) + 16 * at(-h) - at(-2 * h)) / (12 * h * h);
  };
  // 4th-order mixed derivative: composition of two first-derivative stencils
  auto mixed = [&](int i, int j, int a, int b) {
    auto first_b = [&](double step_a) {
      auto at = [&](double step_b) {
        std::vector<double> q = p;
        q[static_cast<size_t>(a)] += step_a;
        q[static_cast<size_t>(b)] += step_b;
        return product_entry(q, i, j);
      };
      return (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12 * h);
    };
    return (-first_b(2 * h) + 8 * first_b(h) - 8 * first_b(-h) + first_b(-2 * h)) / (12 * h);
  };

  double total = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) total += (i == j) ? second(i, j, i) : mixed(i, j, i, j);
  return -total;
}

}  // namespace

double scal_v(const SymplecticPotential& potential, const WeightExpr& v,
              const std::vector<double>& p, ScalMethod method) {
  const Polytope& poly = potential.domain();
  double h = 1e-3 * poly.inradius();
  double distance = std::numeric_limits<double>::infinity();
  for (const auto& label : poly.labels())
    distance = std::min(distance, label.eval(p) / label.norm2());
  double room = method == ScalMethod::FiniteDifference ? 2.5 * h : h;
  if (distance < room)
    fail(ErrorCode::TooCloseToBoundary, "point too close to the boundary for Scal_v");
  return method == ScalMethod::Analytic ? scal_v_analytic(potential, v, p)
                                        : scal_v_fd(potential, v, p, h);
}

double check_futaki_identity(const SymplecticPotential& potential, const WeightExpr& v,
                             const WeightExpr& w, const WeightExpr& f, const Scalar& c,
                             int order) {
  const Polytope& poly = potential.domain();

  // F^P(f): smooth integrands over the full polytope
  double fp = 2.0 * integrate_boundary(
                        poly, [&](const std::vector<double>& p) { return f.eval(p) * v.eval(p); },
                        order) -
              c.value * integrate_interior(
                            poly, [&](const std::vector<double>& p) { return f.eval(p) * w.eval(p); },
                            order);

  auto difference_at = [&](const Rational& eps) {
    Polytope shrunk = poly.shrink(eps);
    double lhs = integrate_interior(
        shrunk,
        [&](const std::vector<double>& p) {
          return (scal_v_analytic(potential, v, p) - c.value * w.eval(p)) * f.eval(p);
        },
        order);
    double correction = integrate_interior(
        shrunk,
        [&](const std::vector<double>& p) {
          Matrix h = potential.hessian_inverse(p);
          auto fh = f.eval_hess(p);
          double tr = 0;
          for (size_t i = 0; i < h.size(); ++i)
            for (size_t j = 0; j < h.size(); ++j) tr += h[i][j] * fh[i][j];
          return tr * v.eval(p);
        },
        order);
    return lhs - (fp - correction);
  };

  double e1 = difference_at(Rational(1, 100));
  double e2 = difference_at(Rational(1, 200));
  double e3 = difference_at(Rational(1, 400));
  double first1 = 2 * e2 - e1;
  double first2 = 2 * e3 - e2;
  return std::abs((4 * first2 - first1) / 3.0);
}

}  // namespace wkstab
