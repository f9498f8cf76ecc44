#include "wkstab/rational.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

#include "wkstab/errors.hpp"

namespace wkstab {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnboundedRegion: return "UnboundedRegion";
    case ErrorCode::EmptyInterior: return "EmptyInterior";
    case ErrorCode::NonPrimitiveNormal: return "NonPrimitiveNormal";
    case ErrorCode::RedundantLabel: return "RedundantLabel";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::UnknownVariable: return "UnknownVariable";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::PositivityViolation: return "PositivityViolation";
    case ErrorCode::NonFiniteIntegrand: return "NonFiniteIntegrand";
    case ErrorCode::SingularGram: return "SingularGram";
    case ErrorCode::NonConvexPieces: return "NonConvexPieces";
    case ErrorCode::EvaluationOnBoundary: return "EvaluationOnBoundary";
    case ErrorCode::TooCloseToBoundary: return "TooCloseToBoundary";
    case ErrorCode::CapViolation: return "CapViolation";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::Z0OutOfRange: return "Z0OutOfRange";
    case ErrorCode::SchemaError: return "SchemaError";
  }
  return "Error";
}

Rational rational_from_string(std::string_view text) {
  size_t begin = 0, end = text.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
  std::string s(text.substr(begin, end - begin));
  if (s.empty()) fail(ErrorCode::SyntaxError, "empty rational literal");

  bool negative = false;
  size_t pos = 0;
  if (s[pos] == '+' || s[pos] == '-') {
    negative = (s[pos] == '-');
    ++pos;
  }

  auto is_digits = [](std::string_view t) {
    if (t.empty()) return false;
    for (char c : t)
      if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
  };

  std::string body = s.substr(pos);
  Rational result;

  if (auto slash = body.find('/'); slash != std::string::npos) {
    std::string num = body.substr(0, slash), den = body.substr(slash + 1);
    if (!is_digits(num) || !is_digits(den))
      fail(ErrorCode::SyntaxError, "bad rational literal '" + s + "'");
    mpz_class n(num), d(den);
    if (d == 0) fail(ErrorCode::SyntaxError, "zero denominator in '" + s + "'");
    result = Rational(n, d);
    result.canonicalize();
  } else {
    // decimal with optional fraction part and exponent
    std::string digits;
    long frac_digits = 0;
    long exponent = 0;
    size_t i = 0;
    for (; i < body.size() && std::isdigit(static_cast<unsigned char>(body[i])); ++i)
      digits += body[i];
    if (i < body.size() && body[i] == '.') {
      ++i;
      for (; i < body.size() && std::isdigit(static_cast<unsigned char>(body[i])); ++i) {
        digits += body[i];
        ++frac_digits;
      }
    }
    if (i < body.size() && (body[i] == 'e' || body[i] == 'E')) {
      std::string etail = body.substr(i + 1);
      size_t epos = 0;
      bool eneg = false;
      if (epos < etail.size() && (etail[epos] == '+' || etail[epos] == '-')) {
        eneg = etail[epos] == '-';
        ++epos;
      }
      if (!is_digits(etail.substr(epos)))
        fail(ErrorCode::SyntaxError, "bad exponent in '" + s + "'");
      exponent = std::strtol(etail.c_str() + epos, nullptr, 10);
      if (eneg) exponent = -exponent;
      i = body.size();
    }
    if (digits.empty() || i != body.size())
      fail(ErrorCode::SyntaxError, "bad rational literal '" + s + "'");
    mpz_class n(digits);
    mpz_class den = 1;
    long net = exponent - frac_digits;
    mpz_class ten = 10;
    if (net >= 0) {
      mpz_class scale;
      mpz_pow_ui(scale.get_mpz_t(), ten.get_mpz_t(), static_cast<unsigned long>(net));
      n *= scale;
    } else {
      mpz_pow_ui(den.get_mpz_t(), ten.get_mpz_t(), static_cast<unsigned long>(-net));
    }
    result = Rational(n, den);
    result.canonicalize();
  }
  if (negative) result = -result;
  return result;
}

std::string to_string(const Rational& q) {
  Rational canonical = q;
  canonical.canonicalize();
  if (canonical.get_den() == 1) return canonical.get_num().get_str();
  return canonical.get_num().get_str() + "/" + canonical.get_den().get_str();
}

Rational rational_pow(const Rational& base, long exp) {
  if (exp == 0) return Rational(1);
  bool inv = exp < 0;
  unsigned long e = static_cast<unsigned long>(inv ? -exp : exp);
  if (inv && base == 0) fail(ErrorCode::DomainError, "0 raised to a negative power");
  mpz_class num, den;
  mpz_pow_ui(num.get_mpz_t(), base.get_num().get_mpz_t(), e);
  mpz_pow_ui(den.get_mpz_t(), base.get_den().get_mpz_t(), e);
  Rational r(num, den);
  r.canonicalize();
  if (inv) r = 1 / r;
  return r;
}

RatVec to_rational(const IntVec& v) {
  RatVec out(v.size());
  for (size_t i = 0; i < v.size(); ++i) out[i] = Rational(static_cast<long>(v[i]));
  return out;
}

std::vector<double> to_doubles(const RatVec& v) {
  std::vector<double> out(v.size());
  for (size_t i = 0; i < v.size(); ++i) out[i] = v[i].get_d();
  return out;
}

Rational dot(const RatVec& a, const RatVec& b) {
  Rational s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Rational dot(const IntVec& a, const RatVec& b) {
  Rational s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += Rational(static_cast<long>(a[i])) * b[i];
  return s;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

bool solve_linear(std::vector<RatVec> a, RatVec rhs, RatVec& out) {
  const size_t n = a.size();
  for (size_t col = 0; col < n; ++col) {
    size_t pivot = col;
    while (pivot < n && a[pivot][col] == 0) ++pivot;
    if (pivot == n) return false;
    std::swap(a[pivot], a[col]);
    std::swap(rhs[pivot], rhs[col]);
    for (size_t r = 0; r < n; ++r) {
      if (r == col || a[r][col] == 0) continue;
      Rational factor = a[r][col] / a[col][col];
      for (size_t c = col; c < n; ++c) a[r][c] -= factor * a[col][c];
      rhs[r] -= factor * rhs[col];
    }
  }
  out.assign(n, Rational(0));
  for (size_t i = 0; i < n; ++i) out[i] = rhs[i] / a[i][i];
  return true;
}

bool solve_linear(std::vector<std::vector<double>> a, std::vector<double> rhs,
                  std::vector<double>& out) {
  const size_t n = a.size();
  for (size_t col = 0; col < n; ++col) {
    size_t pivot = col;
    for (size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    if (a[pivot][col] == 0.0) return false;
    std::swap(a[pivot], a[col]);
    std::swap(rhs[pivot], rhs[col]);
    for (size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      double factor = a[r][col] / a[col][col];
      if (factor == 0.0) continue;
      for (size_t c = col; c < n; ++c) a[r][c] -= factor * a[col][c];
      rhs[r] -= factor * rhs[col];
    }
  }
  out.assign(n, 0.0);
  for (size_t i = 0; i < n; ++i) out[i] = rhs[i] / a[i][i];
  return true;
}

int rank(std::vector<RatVec> rows) {
  if (rows.empty()) return 0;
  const size_t ncols = rows[0].size();
  size_t r = 0;
  for (size_t col = 0; col < ncols && r < rows.size(); ++col) {
    size_t pivot = r;
    while (pivot < rows.size() && rows[pivot][col] == 0) ++pivot;
    if (pivot == rows.size()) continue;
    std::swap(rows[pivot], rows[r]);
    for (size_t i = 0; i < rows.size(); ++i) {
      if (i == r || rows[i][col] == 0) continue;
      Rational factor = rows[i][col] / rows[r][col];
      for (size_t c = col; c < ncols; ++c) rows[i][c] -= factor * rows[r][c];
    }
    ++r;
  }
  return static_cast<int>(r);
}

Rational determinant(std::vector<RatVec> rows) {
  const size_t n = rows.size();
  Rational det = 1;
  for (size_t col = 0; col < n; ++col) {
    size_t pivot = col;
    while (pivot < n && rows[pivot][col] == 0) ++pivot;
    if (pivot == n) return Rational(0);
    if (pivot != col) {
      std::swap(rows[pivot], rows[col]);
      det = -det;
    }
    det *= rows[col][col];
    for (size_t r = col + 1; r < n; ++r) {
      if (rows[r][col] == 0) continue;
      Rational factor = rows[r][col] / rows[col][col];
      for (size_t c = col; c < n; ++c) rows[r][c] -= factor * rows[col][c];
    }
  }
  return det;
}

}  // namespace wkstab
