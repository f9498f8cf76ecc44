#include "wkstab/quad.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include "wkstab/errors.hpp"

namespace wkstab {

namespace {

GaussRule compute_gauss_legendre(int n) {
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    // Chebyshev initial guess, Newton on the three-term recurrence
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.nodes[n - 1 - i] = x;
    rule.weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * pp * pp);
  }
  return rule;
}

std::map<int, GaussRule> g_gauss_cache;
std::map<std::pair<int, int>, SimplexRule> g_simplex_cache;
std::mutex g_cache_mutex;

SimplexRule compute_simplex_rule(int dim, int order) {
  SimplexRule rule;
  rule.dim = dim;
  if (dim == 0) {
    rule.nodes.push_back({});
    rule.weights.push_back(1.0);
    return rule;
  }
  // Conical map u_1 = x_1, u_2 = (1-x_1) x_2, ... with x_j in [0,1].
  // Jacobian prod (1-x_j)^(dim-1-j) raises the degree in early axes, so those
  // axes get proportionally more points.
  std::vector<const GaussRule*> axes(dim);
  for (int j = 0; j < dim; ++j) axes[j] = &gauss_legendre(order + (dim - 1 - j));

  std::vector<int> idx(dim, 0);
  while (true) {
    std::vector<double> u(dim);
    double weight = 1.0, remaining = 1.0;
    for (int j = 0; j < dim; ++j) {
      double x = 0.5 * (axes[j]->nodes[idx[j]] + 1.0);  // map to [0,1]
      double w = 0.5 * axes[j]->weights[idx[j]];
      u[j] = remaining * x;
      weight *= w;
      for (int rep = 0; rep < dim - 1 - j; ++rep) weight *= (1.0 - x);
      remaining *= (1.0 - x);
    }
    rule.nodes.push_back(std::move(u));
    rule.weights.push_back(weight);
    int axis = dim - 1;
    while (axis >= 0) {
      if (++idx[axis] < static_cast<int>(axes[axis]->nodes.size())) break;
      idx[axis] = 0;
      --axis;
    }
    if (axis < 0) break;
  }
  return rule;
}

double eval_checked(const Integrand& g, const std::vector<double>& x) {
  double v = g(x);
  if (!std::isfinite(v)) {
    std::string where = "(";
    for (size_t i = 0; i < x.size(); ++i) where += (i ? "," : "") + std::to_string(x[i]);
    fail(ErrorCode::NonFiniteIntegrand, "integrand not finite at node " + where + ")");
  }
  return v;
}

double integrate_mapped(const Simplex& s, double scale, const Integrand& g, int order) {
  const int d = static_cast<int>(s.vertices.size()) - 1;
  const int ambient = static_cast<int>(s.vertices[0].size());
  const SimplexRule& rule = simplex_rule(d, order);
  std::vector<double> v0 = to_doubles(s.vertices[0]);
  std::vector<std::vector<double>> edges;
  for (int i = 1; i <= d; ++i) {
    std::vector<double> e = to_doubles(s.vertices[i]);
    for (int c = 0; c < ambient; ++c) e[c] -= v0[c];
    edges.push_back(std::move(e));
  }
  double total = 0;
  std::vector<double> x(ambient);
  for (size_t q = 0; q < rule.nodes.size(); ++q) {
    for (int c = 0; c < ambient; ++c) {
      x[c] = v0[c];
      for (int i = 0; i < d; ++i) x[c] += rule.nodes[q][i] * edges[i][c];
    }
    total += rule.weights[q] * eval_checked(g, x);
  }
  return total * scale;
}

double factorial(int n) {
  double f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// Substitution polynomials x_c = v0_c + sum_i u_i (v_i - v0)_c for exact rules.
std::vector<RationalPoly> affine_substitution(const Simplex& s) {
  const int d = static_cast<int>(s.vertices.size()) - 1;
  const int ambient = static_cast<int>(s.vertices[0].size());
  std::vector<RationalPoly> subst;
  for (int c = 0; c < ambient; ++c) {
    RationalPoly pc = RationalPoly::constant(d, s.vertices[0][c]);
    for (int i = 1; i <= d; ++i) {
      RationalPoly ui = RationalPoly::variable(d, i - 1);
      pc += ui * (s.vertices[i][c] - s.vertices[0][c]);
    }
    subst.push_back(std::move(pc));
  }
  return subst;
}

// Exact integral of q over the reference d-simplex: int u^a du = prod a_i! / (|a|+d)!
Rational reference_simplex_integral(const RationalPoly& q) {
  const int d = q.nvars();
  Rational total = 0;
  for (const auto& [m, c] : q.terms()) {
    mpz_class num = 1;
    int sum = 0;
    for (int e : m) {
      mpz_class f;
      mpz_fac_ui(f.get_mpz_t(), static_cast<unsigned long>(e));
      num *= f;
      sum += e;
    }
    mpz_class den;
    mpz_fac_ui(den.get_mpz_t(), static_cast<unsigned long>(sum + d));
    Rational factor(num, den);
    factor.canonicalize();
    total += c * factor;
  }
  return total;
}

}  // namespace

const GaussRule& gauss_legendre(int order) {
  {
    std::lock_guard<std::mutex> lock(g_cache_mutex);
    auto it = g_gauss_cache.find(order);
    if (it != g_gauss_cache.end()) return it->second;
  }
  GaussRule fresh = compute_gauss_legendre(order);
  std::lock_guard<std::mutex> lock(g_cache_mutex);
  return g_gauss_cache.emplace(order, std::move(fresh)).first->second;
}

const SimplexRule& simplex_rule(int dim, int order) {
  auto key = std::make_pair(dim, order);
  {
    std::lock_guard<std::mutex> lock(g_cache_mutex);
    auto it = g_simplex_cache.find(key);
    if (it != g_simplex_cache.end()) return it->second;
  }
  SimplexRule fresh = compute_simplex_rule(dim, order);  // fetches axis rules, locks internally
  std::lock_guard<std::mutex> lock(g_cache_mutex);
  return g_simplex_cache.emplace(key, std::move(fresh)).first->second;
}

double integrate_interior(const Polytope& poly, const Integrand& g, int order) {
  double total = 0;
  for (const Simplex& s : poly.triangulate_interior()) {
    // mapped rule integrates over the reference simplex; |det E| carries the volume
    double scale = simplex_volume(s).get_d() * factorial(poly.dim());
    total += integrate_mapped(s, scale, g, order);
  }
  return total;
}

double integrate_facet(const Polytope& poly, const Facet& facet, const Integrand& g, int order) {
  double total = 0;
  for (const Simplex& s : poly.triangulate_facet(facet)) {
    if (poly.dim() == 1) {
      total += eval_checked(g, to_doubles(s.vertices[0]));  // endpoint mass 1
      continue;
    }
    double measure = facet_simplex_measure(s, poly.labels()[facet.label].normal).get_d();
    total += integrate_mapped(s, measure * factorial(poly.dim() - 1), g, order);
  }
  return total;
}

double integrate_boundary(const Polytope& poly, const Integrand& g, int order) {
  double total = 0;
  for (const Facet& facet : poly.facets()) total += integrate_facet(poly, facet, g, order);
  return total;
}

Rational integrate_exact_poly(const Polytope& poly, const RationalPoly& q) {
  Rational total = 0;
  mpz_class fact;
  mpz_fac_ui(fact.get_mpz_t(), static_cast<unsigned long>(poly.dim()));
  for (const Simplex& s : poly.triangulate_interior()) {
    RationalPoly composed = q.substitute(affine_substitution(s));
    total += reference_simplex_integral(composed) * (simplex_volume(s) * Rational(fact));
  }
  return total;
}

Rational integrate_facet_exact_poly(const Polytope& poly, const Facet& facet,
                                    const RationalPoly& q) {
  Rational total = 0;
  mpz_class fact;
  mpz_fac_ui(fact.get_mpz_t(), static_cast<unsigned long>(poly.dim() > 1 ? poly.dim() - 1 : 0));
  for (const Simplex& s : poly.triangulate_facet(facet)) {
    if (poly.dim() == 1) {
      total += q(s.vertices[0]);
      continue;
    }
    RationalPoly composed = q.substitute(affine_substitution(s));
    Rational measure = facet_simplex_measure(s, poly.labels()[facet.label].normal);
    total += reference_simplex_integral(composed) * (measure * Rational(fact));
  }
  return total;
}

Rational integrate_boundary_exact_poly(const Polytope& poly, const RationalPoly& q) {
  Rational total = 0;
  for (const Facet& facet : poly.facets()) total += integrate_facet_exact_poly(poly, facet, q);
  return total;
}

double integrate_interval(double a, double b, const std::function<double(double)>& g, int order) {
  const GaussRule& rule = gauss_legendre(order);
  double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double total = 0;
  for (size_t i = 0; i < rule.nodes.size(); ++i) {
    double v = g(mid + half * rule.nodes[i]);
    if (!std::isfinite(v))
      fail(ErrorCode::NonFiniteIntegrand, "integrand not finite on interval");
    total += rule.weights[i] * v;
  }
  return total * half;
}

Rational integrate_interval_exact(const RationalPoly& q, const Rational& a, const Rational& b) {
  RationalPoly anti = q.antiderivative(0);
  return anti(RatVec{b}) - anti(RatVec{a});
}

}  // namespace wkstab
