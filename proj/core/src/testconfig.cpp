#include "wkstab/testconfig.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>

#include "wkstab/errors.hpp"
#include "wkstab/quad.hpp"

namespace wkstab {

ToricTestConfig build_config(const Polytope& base, const PLConvex& f, const Rational& cap) {
  // f is convex, so its maximum over P sits at a vertex
  for (const auto& vertex : base.vertices())
    if (f.eval(vertex) > cap)
      fail(ErrorCode::CapViolation, "f exceeds the cap R at a vertex of P");

  PLConvex pruned = f.pruned_on(base);
  const int dim = base.dim();

  std::vector<AffineForm> labels;
  for (const auto& l : base.labels()) {
    AffineForm lifted;
    lifted.normal = l.normal;
    lifted.normal.push_back(0);
    lifted.offset = l.offset;
    labels.push_back(std::move(lifted));
  }
  {
    AffineForm bottom;
    bottom.normal.assign(static_cast<size_t>(dim), 0);
    bottom.normal.push_back(1);
    bottom.offset = 0;
    labels.push_back(std::move(bottom));
  }
  for (const auto& piece : pruned.pieces()) {
    // p' <= R - (<g,p> + off): normal (-g, -1), offset R - off
    RatVec normal(piece.grad.size() + 1);
    for (size_t i = 0; i < piece.grad.size(); ++i) normal[i] = -piece.grad[i];
    normal[piece.grad.size()] = -1;
    labels.push_back(AffineForm::normalized(normal, cap - piece.offset));
  }

  // lifted labels that only touch Q at corners are dropped
  Polytope lifted = Polytope::from_halfspaces(std::move(labels), /*prune_redundant=*/true);
  return ToricTestConfig{base, std::move(pruned), cap, std::move(lifted)};
}

Scalar weight_sum(const Polytope& base, const PLConvex& f, const Rational& cap,
                  const WeightExpr& v, int k) {
  LatticePointSet pts = base.lattice_points(k);
  double total = 0;
  Rational total_exact = 0;
  bool exact_ok = true;
  RatVec point(static_cast<size_t>(base.dim()));
  std::vector<double> point_f(static_cast<size_t>(base.dim()));
  for (const auto& lambda : pts.points) {
    for (size_t i = 0; i < lambda.size(); ++i) {
      point[i] = make_ratio(static_cast<long>(lambda[i]), k);
      point_f[i] = static_cast<double>(lambda[i]) / k;
    }
    double height = cap.get_d() - f.eval(point_f);
    total += height * v.eval(point_f);
    if (exact_ok) {
      auto vr = v.eval_rational(point);
      if (!vr) {
        exact_ok = false;
      } else {
        total_exact += (cap - f.eval(point)) * *vr;
      }
    }
  }
  Scalar out;
  out.value = total;
  if (exact_ok) out.exact = total_exact;
  return out;
}

ExpansionFit fit_expansion(const std::vector<std::pair<int, Scalar>>& series, int n) {
  std::vector<int> distinct;
  for (const auto& [k, w] : series)
    if (std::find(distinct.begin(), distinct.end(), k) == distinct.end()) distinct.push_back(k);
  if (distinct.size() < 4)
    fail(ErrorCode::InsufficientSamples, "expansion fit needs at least 4 distinct k");

  // basis (k/s)^n, (k/s)^(n-1), (k/s)^(n-2) with s = max k keeps the normal
  // equations well conditioned; coefficients are unscaled afterwards
  double scale = 0;
  for (const auto& [k, w] : series) scale = std::max(scale, static_cast<double>(k));
  auto basis = [n, scale](int k, int j) { return std::pow(k / scale, n - j); };
  std::vector<std::vector<double>> ata(3, std::vector<double>(3, 0.0));
  std::vector<double> atb(3, 0.0);
  for (const auto& [k, w] : series) {
    for (int i = 0; i < 3; ++i) {
      atb[static_cast<size_t>(i)] += basis(k, i) * w.value;
      for (int j = 0; j < 3; ++j)
        ata[static_cast<size_t>(i)][static_cast<size_t>(j)] += basis(k, i) * basis(k, j);
    }
  }
  std::vector<double> coeffs;
  if (!solve_linear(ata, atb, coeffs))
    fail(ErrorCode::InsufficientSamples, "degenerate k list in expansion fit");

  ExpansionFit fit;
  fit.a0.value = coeffs[0] / std::pow(scale, n);
  fit.a1.value = coeffs[1] / std::pow(scale, n - 1);
  fit.residual.value = std::abs(coeffs[2]) / std::pow(scale, n - 2);

  bool exact_ok = true;
  for (const auto& [k, w] : series)
    if (!w.exact) exact_ok = false;
  if (exact_ok) {
    auto basis_exact = [n](int k, int j) { return rational_pow(Rational(k), n - j); };
    std::vector<RatVec> ata_e(3, RatVec(3, Rational(0)));
    RatVec atb_e(3, Rational(0));
    for (const auto& [k, w] : series) {
      for (int i = 0; i < 3; ++i) {
        atb_e[static_cast<size_t>(i)] += basis_exact(k, i) * *w.exact;
        for (int j = 0; j < 3; ++j)
          ata_e[static_cast<size_t>(i)][static_cast<size_t>(j)] +=
              basis_exact(k, i) * basis_exact(k, j);
      }
    }
    RatVec coeffs_e;
    if (solve_linear(ata_e, atb_e, coeffs_e)) {
      fit.a0.exact = coeffs_e[0];
      fit.a1.exact = coeffs_e[1];
      fit.residual.exact = coeffs_e[2] < 0 ? Rational(-coeffs_e[2]) : coeffs_e[2];
    }
  }
  return fit;
}

std::vector<int> default_klist(const Polytope& base, const PLConvex& f) {
  // common denominator of 1D tie points; in higher dimension fall back to the
  // denominators of the piece data
  mpz_class lcm = 1;
  const auto& pieces = f.pieces();
  if (base.dim() == 1) {
    for (size_t i = 0; i < pieces.size(); ++i) {
      for (size_t j = i + 1; j < pieces.size(); ++j) {
        Rational dg = pieces[i].grad[0] - pieces[j].grad[0];
        if (dg == 0) continue;
        Rational tie = (pieces[j].offset - pieces[i].offset) / dg;
        mpz_lcm(lcm.get_mpz_t(), lcm.get_mpz_t(), tie.get_den().get_mpz_t());
      }
    }
  } else {
    for (const auto& piece : pieces) {
      for (const auto& g : piece.grad)
        mpz_lcm(lcm.get_mpz_t(), lcm.get_mpz_t(), g.get_den().get_mpz_t());
      mpz_lcm(lcm.get_mpz_t(), lcm.get_mpz_t(), piece.offset.get_den().get_mpz_t());
    }
  }
  if (!lcm.fits_sint_p()) fail(ErrorCode::DomainError, "crease denominators too large for a k list");
  int base_k = static_cast<int>(lcm.get_si());
  return {8 * base_k, 16 * base_k, 24 * base_k, 32 * base_k};
}

DonaldsonFutakiReport donaldson_futaki(const Polytope& base, const PLConvex& f,
                                       const Rational& cap, const WeightExpr& v,
                                       const WeightExpr& w, const std::vector<int>& klist,
                                       int order, int threads) {
  DonaldsonFutakiReport report;
  report.c = slope(base, v, w, order);

  report.v_series.resize(klist.size());
  report.w_series.resize(klist.size());
  auto fill = [&](size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i) {
      report.v_series[i] = {klist[i], weight_sum(base, f, cap, v, klist[i])};
      report.w_series[i] = {klist[i], weight_sum(base, f, cap, w, klist[i])};
    }
  };
  if (threads <= 1 || klist.size() < 2) {
    fill(0, klist.size());
  } else {
    size_t chunk = (klist.size() + static_cast<size_t>(threads) - 1) / static_cast<size_t>(threads);
    std::vector<std::future<void>> futures;
    for (size_t begin = 0; begin < klist.size(); begin += chunk)
      futures.push_back(std::async(std::launch::async, fill, begin,
                                   std::min(begin + chunk, klist.size())));
    for (auto& fut : futures) fut.get();
  }
  const int n = base.dim();
  report.v_fit = fit_expansion(report.v_series, n);
  report.w_fit = fit_expansion(report.w_series, n);
  report.a_v0 = report.v_fit.a0;
  report.a_v1 = report.v_fit.a1;
  report.a_w0 = report.w_fit.a0;

  report.df.value = report.a_v1.value - report.c.value / 4.0 * report.a_w0.value;
  if (report.a_v1.exact && report.a_w0.exact && report.c.exact)
    report.df.exact = *report.a_v1.exact - *report.c.exact / 4 * *report.a_w0.exact;

  report.f_p = futaki(base, v, w, f, report.c, order);

  bool fp_nonzero = report.f_p.exact ? (*report.f_p.exact != 0)
                                     : std::abs(report.f_p.value) > 1e-12;
  if (fp_nonzero) {
    Scalar ratio;
    ratio.value = report.df.value / report.f_p.value;
    if (report.df.exact && report.f_p.exact) ratio.exact = *report.df.exact / *report.f_p.exact;
    report.ratio = ratio;
  }

  report.note =
      "normalization: with W(k) = a0 k^n + a1 k^(n-1) + O(k^(n-2)), the invariant "
      "DF = a_v1 - (c/4) a_w0 equals F^P(R-f)/4 = -F^P(f)/4, so DF/F^P = -1/4; the "
      "alternative convention DF = 4 F^P(f) is not reproduced by these coefficients "
      "and is reported only through this note.";
  return report;
}

}  // namespace wkstab
