#include "wkstab/rational_poly.hpp"

#include <algorithm>

#include "wkstab/errors.hpp"

namespace wkstab {

RationalPoly RationalPoly::constant(int nvars, const Rational& c) {
  RationalPoly p(nvars);
  p.add_term(Monomial(nvars, 0), c);
  return p;
}

RationalPoly RationalPoly::variable(int nvars, int index) {
  RationalPoly p(nvars);
  Monomial m(nvars, 0);
  m[index] = 1;
  p.add_term(std::move(m), Rational(1));
  return p;
}

RationalPoly RationalPoly::univariate(const RatVec& ascending) {
  RationalPoly p(1);
  for (size_t i = 0; i < ascending.size(); ++i)
    p.add_term({static_cast<int>(i)}, ascending[i]);
  return p;
}

void RationalPoly::add_term(Monomial m, const Rational& c) {
  if (c == 0) return;
  auto [it, inserted] = terms_.emplace(std::move(m), c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  }
}

int RationalPoly::total_degree() const {
  int deg = 0;
  for (const auto& [m, c] : terms_) {
    int d = 0;
    for (int e : m) d += e;
    deg = std::max(deg, d);
  }
  return deg;
}

int RationalPoly::degree_in(int var) const {
  int deg = 0;
  for (const auto& [m, c] : terms_) deg = std::max(deg, m[var]);
  return deg;
}

Rational RationalPoly::coefficient(const Monomial& m) const {
  auto it = terms_.find(m);
  return it == terms_.end() ? Rational(0) : it->second;
}

RationalPoly& RationalPoly::operator+=(const RationalPoly& other) {
  for (const auto& [m, c] : other.terms_) add_term(m, c);
  return *this;
}

RationalPoly& RationalPoly::operator-=(const RationalPoly& other) {
  for (const auto& [m, c] : other.terms_) add_term(m, -c);
  return *this;
}

RationalPoly RationalPoly::operator+(const RationalPoly& other) const {
  RationalPoly out = *this;
  out += other;
  return out;
}

RationalPoly RationalPoly::operator-(const RationalPoly& other) const {
  RationalPoly out = *this;
  out -= other;
  return out;
}

RationalPoly RationalPoly::operator-() const {
  RationalPoly out(nvars_);
  for (const auto& [m, c] : terms_) out.terms_.emplace(m, -c);
  return out;
}

RationalPoly RationalPoly::operator*(const RationalPoly& other) const {
  RationalPoly out(nvars_);
  for (const auto& [ma, ca] : terms_) {
    for (const auto& [mb, cb] : other.terms_) {
      Monomial m(nvars_);
      for (int i = 0; i < nvars_; ++i) m[i] = ma[i] + mb[i];
      out.add_term(std::move(m), ca * cb);
    }
  }
  return out;
}

RationalPoly RationalPoly::operator*(const Rational& scalar) const {
  RationalPoly out(nvars_);
  if (scalar == 0) return out;
  for (const auto& [m, c] : terms_) out.terms_.emplace(m, c * scalar);
  return out;
}

RationalPoly RationalPoly::pow(unsigned exponent) const {
  RationalPoly result = constant(nvars_, Rational(1));
  RationalPoly base = *this;
  while (exponent) {
    if (exponent & 1u) result = result * base;
    base = base * base;
    exponent >>= 1u;
  }
  return result;
}

RationalPoly RationalPoly::derivative(int var) const {
  RationalPoly out(nvars_);
  for (const auto& [m, c] : terms_) {
    if (m[var] == 0) continue;
    Monomial d = m;
    d[var] -= 1;
    out.add_term(std::move(d), c * m[var]);
  }
  return out;
}

RationalPoly RationalPoly::antiderivative(int var) const {
  RationalPoly out(nvars_);
  for (const auto& [m, c] : terms_) {
    Monomial d = m;
    d[var] += 1;
    out.add_term(std::move(d), c / Rational(d[var]));
  }
  return out;
}

Rational RationalPoly::operator()(const RatVec& point) const {
  Rational total = 0;
  for (const auto& [m, c] : terms_) {
    Rational term = c;
    for (int i = 0; i < nvars_; ++i)
      for (int e = 0; e < m[i]; ++e) term *= point[i];
    total += term;
  }
  return total;
}

double RationalPoly::operator()(const std::vector<double>& point) const {
  double total = 0;
  for (const auto& [m, c] : terms_) {
    double term = c.get_d();
    for (int i = 0; i < nvars_; ++i)
      for (int e = 0; e < m[i]; ++e) term *= point[i];
    total += term;
  }
  return total;
}

RationalPoly RationalPoly::substitute(const std::vector<RationalPoly>& replacement) const {
  const int target_vars = replacement.empty() ? nvars_ : replacement[0].nvars();
  RationalPoly out(target_vars);
  for (const auto& [m, c] : terms_) {
    RationalPoly term = RationalPoly::constant(target_vars, c);
    for (int i = 0; i < nvars_; ++i)
      if (m[i] > 0) term = term * replacement[i].pow(static_cast<unsigned>(m[i]));
    out += term;
  }
  return out;
}

RatVec RationalPoly::coefficients() const {
  if (nvars_ != 1) fail(ErrorCode::DimensionMismatch, "coefficients() needs a univariate polynomial");
  RatVec out(static_cast<size_t>(degree_in(0)) + 1, Rational(0));
  for (const auto& [m, c] : terms_) out[static_cast<size_t>(m[0])] = c;
  return upoly::trim(std::move(out));
}

namespace upoly {

RatVec trim(RatVec p) {
  while (!p.empty() && p.back() == 0) p.pop_back();
  return p;
}

int degree(const RatVec& p) { return static_cast<int>(p.size()) - 1; }

Rational eval(const RatVec& p, const Rational& x) {
  Rational acc = 0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * x + *it;
  return acc;
}

double eval(const RatVec& p, double x) {
  double acc = 0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * x + it->get_d();
  return acc;
}

RatVec derivative(const RatVec& p) {
  if (p.size() <= 1) return {};
  RatVec out(p.size() - 1);
  for (size_t i = 1; i < p.size(); ++i) out[i - 1] = p[i] * Rational(static_cast<long>(i));
  return out;
}

RatVec add(const RatVec& a, const RatVec& b) {
  RatVec out(std::max(a.size(), b.size()), Rational(0));
  for (size_t i = 0; i < a.size(); ++i) out[i] += a[i];
  for (size_t i = 0; i < b.size(); ++i) out[i] += b[i];
  return trim(std::move(out));
}

RatVec multiply(const RatVec& a, const RatVec& b) {
  if (a.empty() || b.empty()) return {};
  RatVec out(a.size() + b.size() - 1, Rational(0));
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return trim(std::move(out));
}

RatVec scale(const RatVec& a, const Rational& s) {
  if (s == 0) return {};
  RatVec out = a;
  for (auto& c : out) c *= s;
  return out;
}

RatVec remainder(RatVec a, const RatVec& b_in) {
  a = trim(std::move(a));
  RatVec b = trim(b_in);
  if (b.empty()) fail(ErrorCode::DomainError, "polynomial division by zero");
  while (a.size() >= b.size()) {
    Rational factor = a.back() / b.back();
    size_t shift = a.size() - b.size();
    for (size_t i = 0; i < b.size(); ++i) a[shift + i] -= factor * b[i];
    a = trim(std::move(a));
    if (a.empty()) break;
  }
  return a;
}

RatVec divide_exact(const RatVec& a_in, const RatVec& b_in) {
  RatVec a = trim(a_in);
  RatVec b = trim(b_in);
  if (b.empty()) fail(ErrorCode::DomainError, "polynomial division by zero");
  if (a.empty()) return {};
  if (a.size() < b.size()) fail(ErrorCode::DomainError, "inexact polynomial division");
  RatVec q(a.size() - b.size() + 1, Rational(0));
  while (a.size() >= b.size()) {
    Rational factor = a.back() / b.back();
    size_t shift = a.size() - b.size();
    q[shift] = factor;
    for (size_t i = 0; i < b.size(); ++i) a[shift + i] -= factor * b[i];
    a = trim(std::move(a));
    if (a.empty()) break;
  }
  if (!a.empty()) fail(ErrorCode::DomainError, "inexact polynomial division");
  return trim(std::move(q));
}

RatVec gcd(RatVec a, RatVec b) {
  a = trim(std::move(a));
  b = trim(std::move(b));
  while (!b.empty()) {
    RatVec r = remainder(a, b);
    a = std::move(b);
    b = std::move(r);
  }
  if (!a.empty() && a.back() != 1) {
    Rational lead = a.back();
    for (auto& c : a) c /= lead;
  }
  return a;
}

RatVec square_free_part(const RatVec& p) {
  RatVec d = derivative(p);
  if (d.empty()) return trim(p).empty() ? RatVec{} : RatVec{Rational(1)};
  RatVec g = gcd(p, d);
  if (degree(g) <= 0) return trim(p);
  return divide_exact(trim(p), g);
}

namespace {

int sign_variations(const std::vector<RatVec>& chain, const Rational& x) {
  int variations = 0, prev = 0;
  for (const auto& p : chain) {
    int s = sgn(eval(p, x));
    if (s == 0) continue;
    if (prev != 0 && s != prev) ++variations;
    prev = s;
  }
  return variations;
}

}  // namespace

int count_roots_open(const RatVec& p_in, const Rational& a, const Rational& b) {
  RatVec p = square_free_part(trim(p_in));
  if (p.empty()) fail(ErrorCode::DomainError, "root counting on the zero polynomial");
  if (degree(p) == 0) return 0;

  // Deflate endpoint roots so the Sturm bound (a, b] applies cleanly.
  while (!p.empty() && eval(p, a) == 0) p = divide_exact(p, RatVec{-a, Rational(1)});
  while (!p.empty() && eval(p, b) == 0) p = divide_exact(p, RatVec{-b, Rational(1)});
  if (degree(p) <= 0) return 0;

  std::vector<RatVec> chain;
  chain.push_back(p);
  chain.push_back(derivative(p));
  while (!chain.back().empty() && degree(chain.back()) > 0) {
    RatVec r = remainder(chain[chain.size() - 2], chain.back());
    if (r.empty()) break;
    for (auto& c : r) c = -c;
    chain.push_back(std::move(r));
  }
  return sign_variations(chain, a) - sign_variations(chain, b);
}

}  // namespace upoly

}  // namespace wkstab
