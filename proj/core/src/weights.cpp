#include "wkstab/weights.hpp"

#include <cctype>
#include <cmath>

#include "wkstab/errors.hpp"

namespace wkstab {

namespace detail {

enum class Kind { Num, Var, Add, Sub, Mul, Div, Pow, Exp, Log, Neg };

struct Expr {
  Kind kind;
  Rational value;    // Num literal or Pow exponent
  int var = -1;      // Var index
  ExprPtr a, b;
};

namespace {

ExprPtr make_num(const Rational& q) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Num;
  e->value = q;
  return e;
}

ExprPtr make_var(int i) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Var;
  e->var = i;
  return e;
}

bool is_num(const ExprPtr& e, const Rational& q) { return e->kind == Kind::Num && e->value == q; }

ExprPtr make_binary(Kind k, ExprPtr a, ExprPtr b);

ExprPtr make_neg(ExprPtr a) {
  if (a->kind == Kind::Num) return make_num(-a->value);
  if (a->kind == Kind::Neg) return a->a;
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Neg;
  e->a = std::move(a);
  return e;
}

ExprPtr make_binary(Kind k, ExprPtr a, ExprPtr b) {
  if (a->kind == Kind::Num && b->kind == Kind::Num) {
    switch (k) {
      case Kind::Add: return make_num(a->value + b->value);
      case Kind::Sub: return make_num(a->value - b->value);
      case Kind::Mul: return make_num(a->value * b->value);
      case Kind::Div:
        if (b->value == 0) fail(ErrorCode::DomainError, "division by zero constant");
        return make_num(a->value / b->value);
      default: break;
    }
  }
  switch (k) {
    case Kind::Add:
      if (is_num(a, 0)) return b;
      if (is_num(b, 0)) return a;
      break;
    case Kind::Sub:
      if (is_num(b, 0)) return a;
      if (is_num(a, 0)) return make_neg(b);
      break;
    case Kind::Mul:
      if (is_num(a, 0) || is_num(b, 0)) return make_num(Rational(0));
      if (is_num(a, 1)) return b;
      if (is_num(b, 1)) return a;
      break;
    case Kind::Div:
      if (is_num(a, 0)) return make_num(Rational(0));
      if (is_num(b, 1)) return a;
      break;
    default: break;
  }
  auto e = std::make_shared<Expr>();
  e->kind = k;
  e->a = std::move(a);
  e->b = std::move(b);
  return e;
}

// affine in the variables: numbers, variables, and +,-,* combinations of
// degree at most one (the only bases on which fractional powers are allowed)
bool is_affine(const Expr& e) {
  switch (e.kind) {
    case Kind::Num: case Kind::Var: return true;
    case Kind::Add: case Kind::Sub: return is_affine(*e.a) && is_affine(*e.b);
    case Kind::Neg: return is_affine(*e.a);
    case Kind::Mul:
      return (e.a->kind == Kind::Num && is_affine(*e.b)) ||
             (e.b->kind == Kind::Num && is_affine(*e.a));
    case Kind::Div: return e.b->kind == Kind::Num && is_affine(*e.a);
    default: return false;
  }
}

ExprPtr make_pow(ExprPtr base, const Rational& exponent) {
  if (exponent == 0) return make_num(Rational(1));
  if (exponent == 1) return base;
  if (base->kind == Kind::Num && exponent.get_den() == 1) {
    long e = exponent.get_num().get_si();
    if (base->value == 0 && e < 0) fail(ErrorCode::DomainError, "0^negative");
    return make_num(rational_pow(base->value, e));
  }
  if (exponent.get_den() != 1 && !is_affine(*base))
    fail(ErrorCode::DomainError, "fractional exponents are only allowed on affine bases");
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Pow;
  e->a = std::move(base);
  e->value = exponent;
  return e;
}

ExprPtr make_unary(Kind k, ExprPtr a) {
  auto e = std::make_shared<Expr>();
  e->kind = k;
  e->a = std::move(a);
  return e;
}

double eval_node(const Expr& e, const std::vector<double>& p) {
  switch (e.kind) {
    case Kind::Num: return e.value.get_d();
    case Kind::Var: return p[static_cast<size_t>(e.var)];
    case Kind::Add: return eval_node(*e.a, p) + eval_node(*e.b, p);
    case Kind::Sub: return eval_node(*e.a, p) - eval_node(*e.b, p);
    case Kind::Mul: return eval_node(*e.a, p) * eval_node(*e.b, p);
    case Kind::Div: {
      double denom = eval_node(*e.b, p);
      if (denom == 0) fail(ErrorCode::DomainError, "division by zero");
      return eval_node(*e.a, p) / denom;
    }
    case Kind::Pow: {
      double base = eval_node(*e.a, p);
      if (e.value.get_den() == 1) {
        long k = e.value.get_num().get_si();
        if (base == 0 && k < 0) fail(ErrorCode::DomainError, "0 raised to a negative power");
        return std::pow(base, static_cast<double>(k));
      }
      if (base <= 0)
        fail(ErrorCode::DomainError, "non-positive base with a fractional exponent");
      return std::pow(base, e.value.get_d());
    }
    case Kind::Exp: return std::exp(eval_node(*e.a, p));
    case Kind::Log: {
      double arg = eval_node(*e.a, p);
      if (arg <= 0) fail(ErrorCode::DomainError, "log of a non-positive value");
      return std::log(arg);
    }
    case Kind::Neg: return -eval_node(*e.a, p);
  }
  return 0;
}

std::optional<Rational> eval_rational_node(const Expr& e, const RatVec& p) {
  switch (e.kind) {
    case Kind::Num: return e.value;
    case Kind::Var: return p[static_cast<size_t>(e.var)];
    case Kind::Add: case Kind::Sub: case Kind::Mul: case Kind::Div: {
      auto a = eval_rational_node(*e.a, p);
      auto b = eval_rational_node(*e.b, p);
      if (!a || !b) return std::nullopt;
      switch (e.kind) {
        case Kind::Add: return *a + *b;
        case Kind::Sub: return *a - *b;
        case Kind::Mul: return *a * *b;
        default:
          if (*b == 0) fail(ErrorCode::DomainError, "division by zero");
          return *a / *b;
      }
    }
    case Kind::Pow: {
      if (e.value.get_den() != 1) return std::nullopt;
      auto a = eval_rational_node(*e.a, p);
      if (!a) return std::nullopt;
      return rational_pow(*a, e.value.get_num().get_si());
    }
    case Kind::Exp: case Kind::Log: return std::nullopt;
    case Kind::Neg: {
      auto a = eval_rational_node(*e.a, p);
      if (!a) return std::nullopt;
      return -*a;
    }
  }
  return std::nullopt;
}

ExprPtr diff_node(const ExprPtr& e, int var) {
  switch (e->kind) {
    case Kind::Num: return make_num(Rational(0));
    case Kind::Var: return make_num(Rational(e->var == var ? 1 : 0));
    case Kind::Add: return make_binary(Kind::Add, diff_node(e->a, var), diff_node(e->b, var));
    case Kind::Sub: return make_binary(Kind::Sub, diff_node(e->a, var), diff_node(e->b, var));
    case Kind::Mul:
      return make_binary(Kind::Add, make_binary(Kind::Mul, diff_node(e->a, var), e->b),
                         make_binary(Kind::Mul, e->a, diff_node(e->b, var)));
    case Kind::Div:
      // (a/b)' = a'/b - a b'/b^2
      return make_binary(
          Kind::Sub, make_binary(Kind::Div, diff_node(e->a, var), e->b),
          make_binary(Kind::Div, make_binary(Kind::Mul, e->a, diff_node(e->b, var)),
                      make_pow(e->b, Rational(2))));
    case Kind::Pow:
      // (a^q)' = q a^(q-1) a'
      return make_binary(Kind::Mul, make_num(e->value),
                         make_binary(Kind::Mul, make_pow(e->a, e->value - 1), diff_node(e->a, var)));
    case Kind::Exp: return make_binary(Kind::Mul, make_unary(Kind::Exp, e->a), diff_node(e->a, var));
    case Kind::Log: return make_binary(Kind::Div, diff_node(e->a, var), e->a);
    case Kind::Neg: return make_neg(diff_node(e->a, var));
  }
  return make_num(Rational(0));
}

std::optional<RationalPoly> poly_node(const Expr& e, int dim) {
  switch (e.kind) {
    case Kind::Num: return RationalPoly::constant(dim, e.value);
    case Kind::Var: return RationalPoly::variable(dim, e.var);
    case Kind::Add: case Kind::Sub: case Kind::Mul: {
      auto a = poly_node(*e.a, dim);
      auto b = poly_node(*e.b, dim);
      if (!a || !b) return std::nullopt;
      if (e.kind == Kind::Add) return *a + *b;
      if (e.kind == Kind::Sub) return *a - *b;
      return *a * *b;
    }
    case Kind::Div: {
      auto a = poly_node(*e.a, dim);
      auto b = poly_node(*e.b, dim);
      if (!a || !b) return std::nullopt;
      if (b->total_degree() > 0) return std::nullopt;
      Rational c = b->coefficient(RationalPoly::Monomial(dim, 0));
      if (c == 0) fail(ErrorCode::DomainError, "division by zero");
      return *a * (1 / c);
    }
    case Kind::Pow: {
      if (e.value.get_den() != 1 || e.value < 0) return std::nullopt;
      auto a = poly_node(*e.a, dim);
      if (!a) return std::nullopt;
      return a->pow(static_cast<unsigned>(e.value.get_num().get_ui()));
    }
    case Kind::Exp: case Kind::Log: return std::nullopt;
    case Kind::Neg: {
      auto a = poly_node(*e.a, dim);
      if (!a) return std::nullopt;
      return -*a;
    }
  }
  return std::nullopt;
}

void print_node(const Expr& e, std::string& out) {
  switch (e.kind) {
    case Kind::Num:
      if (e.value < 0) {
        out += "(0-" + wkstab::to_string(-e.value) + ")";
      } else {
        out += wkstab::to_string(e.value);
      }
      break;
    case Kind::Var: out += "p" + std::to_string(e.var + 1); break;
    case Kind::Add: out += "("; print_node(*e.a, out); out += "+"; print_node(*e.b, out); out += ")"; break;
    case Kind::Sub: out += "("; print_node(*e.a, out); out += "-"; print_node(*e.b, out); out += ")"; break;
    case Kind::Mul: out += "("; print_node(*e.a, out); out += "*"; print_node(*e.b, out); out += ")"; break;
    case Kind::Div: out += "("; print_node(*e.a, out); out += "/"; print_node(*e.b, out); out += ")"; break;
    case Kind::Pow: {
      out += "(";
      print_node(*e.a, out);
      out += ")^(";
      out += e.value.get_num().get_str();
      if (e.value.get_den() != 1) out += "/" + e.value.get_den().get_str();
      out += ")";
      break;
    }
    case Kind::Exp: out += "exp("; print_node(*e.a, out); out += ")"; break;
    case Kind::Log: out += "log("; print_node(*e.a, out); out += ")"; break;
    case Kind::Neg: out += "(0-"; print_node(*e.a, out); out += ")"; break;
  }
}

// --- recursive-descent parser ---------------------------------------------

struct Parser {
  const std::string& text;
  size_t pos = 0;
  int dim;

  explicit Parser(const std::string& t, int d) : text(t), dim(d) {}

  void skip_space() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }

  bool peek(char c) {
    skip_space();
    return pos < text.size() && text[pos] == c;
  }

  bool consume(char c) {
    if (!peek(c)) return false;
    ++pos;
    return true;
  }

  [[noreturn]] void syntax_error(const std::string& what) {
    fail(ErrorCode::SyntaxError, what + " at position " + std::to_string(pos));
  }

  Rational parse_number() {
    skip_space();
    size_t start = pos;
    while (pos < text.size() &&
           (std::isdigit(static_cast<unsigned char>(text[pos])) || text[pos] == '.'))
      ++pos;
    if (pos == start) syntax_error("expected a number");
    return rational_from_string(text.substr(start, pos - start));
  }

  // allow_slash: a bare "a/b" exponent only inside "^( )"; otherwise '/'
  // stays the division operator (p1^2/7 reads as (p1^2)/7)
  Rational parse_signed_rational(bool allow_slash) {
    skip_space();
    bool negative = false;
    if (consume('-')) negative = true;
    else consume('+');
    Rational num = parse_number();
    if (allow_slash && pos < text.size() && text[pos] == '/') {
      ++pos;
      Rational den = parse_number();
      if (den == 0) syntax_error("zero denominator in exponent");
      num /= den;
    }
    return negative ? Rational(-num) : num;
  }

  ExprPtr parse_base() {
    skip_space();
    if (pos >= text.size()) syntax_error("unexpected end of input");
    char c = text[pos];
    if (c == '(') {
      ++pos;
      ExprPtr e = parse_expr();
      if (!consume(')')) syntax_error("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return make_num(parse_number());
    if (std::isalpha(static_cast<unsigned char>(c))) {
      size_t start = pos;
      while (pos < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
        ++pos;
      std::string name = text.substr(start, pos - start);
      if (name == "exp" || name == "log") {
        if (!consume('(')) syntax_error("expected '(' after " + name);
        ExprPtr arg = parse_expr();
        if (!consume(')')) syntax_error("expected ')'");
        return make_unary(name == "exp" ? Kind::Exp : Kind::Log, std::move(arg));
      }
      if (name.size() >= 2 && name[0] == 'p') {
        bool digits = true;
        for (size_t i = 1; i < name.size(); ++i)
          if (!std::isdigit(static_cast<unsigned char>(name[i]))) digits = false;
        if (digits) {
          int index = std::stoi(name.substr(1));
          if (index < 1) fail(ErrorCode::UnknownVariable, "variable indices start at p1");
          if (index > dim)
            fail(ErrorCode::DimensionMismatch,
                 "variable " + name + " exceeds dimension " + std::to_string(dim));
          return make_var(index - 1);
        }
      }
      fail(ErrorCode::UnknownVariable, "unknown identifier '" + name + "'");
    }
    syntax_error(std::string("unexpected character '") + c + "'");
  }

  ExprPtr parse_factor() {
    ExprPtr base = parse_base();
    if (consume('^')) {
      if (consume('(')) {
        Rational exponent = parse_signed_rational(true);
        if (!consume(')')) syntax_error("expected ')' after exponent");
        return make_pow(std::move(base), exponent);
      }
      return make_pow(std::move(base), parse_signed_rational(false));
    }
    return base;
  }

  ExprPtr parse_term() {
    ExprPtr e = parse_factor();
    while (true) {
      if (consume('*')) e = make_binary(Kind::Mul, std::move(e), parse_factor());
      else if (consume('/')) e = make_binary(Kind::Div, std::move(e), parse_factor());
      else break;
    }
    return e;
  }

  ExprPtr parse_expr() {
    skip_space();
    bool leading_minus = consume('-');
    ExprPtr e = parse_term();
    if (leading_minus) e = make_neg(std::move(e));
    while (true) {
      if (consume('+')) e = make_binary(Kind::Add, std::move(e), parse_term());
      else if (consume('-')) e = make_binary(Kind::Sub, std::move(e), parse_term());
      else break;
    }
    return e;
  }
};

ExprPtr affine_node(const RatVec& xi, const Rational& a) {
  ExprPtr e = make_num(a);
  for (size_t i = 0; i < xi.size(); ++i)
    e = make_binary(Kind::Add, std::move(e),
                    make_binary(Kind::Mul, make_num(xi[i]), make_var(static_cast<int>(i))));
  return e;
}

}  // namespace

}  // namespace detail

using detail::Expr;
using detail::ExprPtr;
using detail::Kind;

WeightExpr::WeightExpr(int dim, detail::ExprPtr root) : dim_(dim), root_(std::move(root)) {
  build_derivatives();
}

void WeightExpr::build_derivatives() {
  grad_.resize(static_cast<size_t>(dim_));
  hess_.assign(static_cast<size_t>(dim_), std::vector<ExprPtr>(static_cast<size_t>(dim_)));
  for (int i = 0; i < dim_; ++i) grad_[static_cast<size_t>(i)] = detail::diff_node(root_, i);
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j)
      hess_[static_cast<size_t>(i)][static_cast<size_t>(j)] =
          detail::diff_node(grad_[static_cast<size_t>(i)], j);
}

WeightExpr WeightExpr::parse(const std::string& text, int dim) {
  detail::Parser parser(text, dim);
  ExprPtr root = parser.parse_expr();
  parser.skip_space();
  if (parser.pos != text.size())
    fail(ErrorCode::SyntaxError, "trailing input at position " + std::to_string(parser.pos));
  return WeightExpr(dim, std::move(root));
}

WeightExpr WeightExpr::constant(int dim, const Rational& c) {
  return WeightExpr(dim, detail::make_num(c));
}

WeightExpr WeightExpr::affine(const RatVec& xi, const Rational& a) {
  return WeightExpr(static_cast<int>(xi.size()), detail::affine_node(xi, a));
}

WeightExpr WeightExpr::affine_power(const RatVec& xi, const Rational& a, const Rational& k) {
  return WeightExpr(static_cast<int>(xi.size()), detail::make_pow(detail::affine_node(xi, a), k));
}

WeightExpr WeightExpr::exponential(const RatVec& xi) {
  return WeightExpr(static_cast<int>(xi.size()),
                    detail::make_unary(Kind::Exp, detail::affine_node(xi, Rational(0))));
}

WeightExpr WeightExpr::product(const std::vector<WeightExpr>& factors) {
  if (factors.empty()) fail(ErrorCode::DomainError, "empty product needs a dimension");
  ExprPtr e = detail::make_num(Rational(1));
  for (const auto& f : factors) e = detail::make_binary(Kind::Mul, std::move(e), f.root_);
  return WeightExpr(factors[0].dim(), std::move(e));
}

double WeightExpr::eval(const std::vector<double>& p) const {
  if (static_cast<int>(p.size()) != dim_)
    fail(ErrorCode::DimensionMismatch, "evaluation point has wrong dimension");
  return detail::eval_node(*root_, p);
}

std::vector<double> WeightExpr::eval_grad(const std::vector<double>& p) const {
  std::vector<double> out(static_cast<size_t>(dim_));
  for (int i = 0; i < dim_; ++i) out[static_cast<size_t>(i)] = detail::eval_node(*grad_[static_cast<size_t>(i)], p);
  return out;
}

std::vector<std::vector<double>> WeightExpr::eval_hess(const std::vector<double>& p) const {
  std::vector<std::vector<double>> out(static_cast<size_t>(dim_),
                                       std::vector<double>(static_cast<size_t>(dim_)));
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j)
      out[static_cast<size_t>(i)][static_cast<size_t>(j)] =
          detail::eval_node(*hess_[static_cast<size_t>(i)][static_cast<size_t>(j)], p);
  return out;
}

std::optional<Rational> WeightExpr::eval_rational(const RatVec& p) const {
  return detail::eval_rational_node(*root_, p);
}

std::optional<RationalPoly> WeightExpr::as_polynomial() const {
  return detail::poly_node(*root_, dim_);
}

WeightExpr WeightExpr::derivative(int var) const {
  return WeightExpr(dim_, detail::diff_node(root_, var));
}

std::string WeightExpr::to_string() const {
  std::string out;
  detail::print_node(*root_, out);
  return out;
}

WeightExpr WeightExpr::operator+(const WeightExpr& other) const {
  return WeightExpr(dim_, detail::make_binary(Kind::Add, root_, other.root_));
}

WeightExpr WeightExpr::operator-(const WeightExpr& other) const {
  return WeightExpr(dim_, detail::make_binary(Kind::Sub, root_, other.root_));
}

WeightExpr WeightExpr::operator*(const WeightExpr& other) const {
  return WeightExpr(dim_, detail::make_binary(Kind::Mul, root_, other.root_));
}

std::pair<WeightExpr, WeightExpr> generalized_calabi_weights(
    const std::vector<CalabiFactor>& base, const RatVec& xi0, const Rational& c0,
    const Polytope* domain) {
  const int dim = static_cast<int>(xi0.size());
  if (domain) {
    for (size_t j = 0; j < base.size(); ++j) {
      for (const auto& vertex : domain->vertices()) {
        if (sgn(dot(base[j].xi, vertex) + base[j].c) <= 0)
          fail(ErrorCode::PositivityViolation,
               "generalized Calabi factor " + std::to_string(j + 1) +
                   " is non-positive at a vertex");
      }
    }
  }
  WeightExpr v = WeightExpr::constant(dim, Rational(1));
  for (const auto& factor : base)
    v = v * WeightExpr::affine_power(factor.xi, factor.c, Rational(factor.d));
  WeightExpr w = WeightExpr::affine(xi0, c0) * v;
  for (size_t j = 0; j < base.size(); ++j) {
    // v / (<xi_j,p>+c_j) assembled with reduced exponent so polynomial data
    // stays polynomial
    WeightExpr quotient = WeightExpr::constant(dim, Rational(1));
    for (size_t k = 0; k < base.size(); ++k) {
      Rational exponent = Rational(base[k].d) - (k == j ? 1 : 0);
      quotient = quotient * WeightExpr::affine_power(base[k].xi, base[k].c, exponent);
    }
    w = w - WeightExpr::constant(dim, base[j].scal) * quotient;
  }
  return {v, w};
}

bool is_positive_on(const WeightExpr& v, const Polytope& poly) {
  auto check = [&](const std::vector<double>& p) {
    try {
      return v.eval(p) > 0;
    } catch (const Error&) {
      return false;
    }
  };
  for (const auto& vertex : poly.vertices())
    if (!check(to_doubles(vertex))) return false;

  auto [lo_r, hi_r] = poly.bounding_box();
  std::vector<double> lo = to_doubles(lo_r), hi = to_doubles(hi_r);
  const int dim = poly.dim();
  int per_axis = dim == 1 ? 1001 : (dim == 2 ? 101 : 11);
  std::vector<int> idx(static_cast<size_t>(dim), 0);
  std::vector<double> p(static_cast<size_t>(dim));
  while (true) {
    for (int i = 0; i < dim; ++i)
      p[static_cast<size_t>(i)] =
          lo[static_cast<size_t>(i)] + (hi[static_cast<size_t>(i)] - lo[static_cast<size_t>(i)]) *
                                           idx[static_cast<size_t>(i)] / (per_axis - 1);
    bool inside = true;
    for (const auto& label : poly.labels())
      if (label.eval(p) < 0) inside = false;
    if (inside && !check(p)) return false;
    int axis = dim - 1;
    while (axis >= 0) {
      if (++idx[static_cast<size_t>(axis)] < per_axis) break;
      idx[static_cast<size_t>(axis)] = 0;
      --axis;
    }
    if (axis < 0) break;
  }
  return true;
}

}  // namespace wkstab
