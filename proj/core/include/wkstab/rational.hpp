#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>
#include <vector>

namespace wkstab {

// Exact arithmetic backbone. mpq_class carries arbitrary-precision rationals;
// everything that claims "exact" in this library bottoms out here.
using Rational = mpq_class;

using RatVec = std::vector<Rational>;
using IntVec = std::vector<long long>;

// Accepts "3", "-5/7", "1.25", "-0.5e2". Throws Error(SyntaxError) on junk.
Rational rational_from_string(std::string_view text);

// Canonical form: "n" for integers, "num/den" otherwise (den > 0).
std::string to_string(const Rational& q);

// Two-argument construction with canonicalization (mpq_class alone keeps 6/4).
inline Rational make_ratio(long num, long den) {
  Rational q(num, den);
  q.canonicalize();
  return q;
}

inline double to_double(const Rational& q) { return q.get_d(); }

Rational rational_pow(const Rational& base, long exp);

inline int sign(const Rational& q) { return sgn(q); }

RatVec to_rational(const IntVec& v);
RatVec to_rational(const std::vector<double>&) = delete;  // never round floats into the exact pipeline

std::vector<double> to_doubles(const RatVec& v);

Rational dot(const RatVec& a, const RatVec& b);
Rational dot(const IntVec& a, const RatVec& b);
double dot(const std::vector<double>& a, const std::vector<double>& b);

// Exact dense linear solve (Gaussian elimination, exact pivoting).
// Returns false when the matrix is singular.
bool solve_linear(std::vector<RatVec> a, RatVec rhs, RatVec& out);
bool solve_linear(std::vector<std::vector<double>> a, std::vector<double> rhs,
                  std::vector<double>& out);

// Rank of a rational matrix (rows of equal length).
int rank(std::vector<RatVec> rows);

// Determinant of a square rational matrix.
Rational determinant(std::vector<RatVec> rows);

}  // namespace wkstab
