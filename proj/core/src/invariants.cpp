#include "wkstab/invariants.hpp"

#include <algorithm>
#include <cmath>
#include <future>

#include "wkstab/errors.hpp"

namespace wkstab {

WeightFn WeightFn::from(const WeightExpr& e) {
  WeightFn out;
  out.fn = [e](const std::vector<double>& p) { return e.eval(p); };
  out.poly = e.as_polynomial();
  return out;
}

PLConvex PLConvex::from_pieces(std::vector<Piece> pieces) {
  if (pieces.empty()) fail(ErrorCode::NonConvexPieces, "a PL function needs at least one piece");
  PLConvex f;
  f.dim_ = static_cast<int>(pieces[0].grad.size());
  for (auto& piece : pieces) {
    if (static_cast<int>(piece.grad.size()) != f.dim_)
      fail(ErrorCode::DimensionMismatch, "PL pieces of mixed dimension");
    if (std::find(f.pieces_.begin(), f.pieces_.end(), piece) == f.pieces_.end())
      f.pieces_.push_back(std::move(piece));
  }
  return f;
}

PLConvex PLConvex::affine(RatVec grad, Rational offset) {
  return from_pieces({Piece{std::move(grad), std::move(offset)}});
}

double PLConvex::eval(const std::vector<double>& p) const {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& piece : pieces_) {
    double v = piece.offset.get_d();
    for (size_t i = 0; i < piece.grad.size(); ++i) v += piece.grad[i].get_d() * p[i];
    best = std::max(best, v);
  }
  return best;
}

Rational PLConvex::eval(const RatVec& p) const {
  Rational best = dot(pieces_[0].grad, p) + pieces_[0].offset;
  for (size_t j = 1; j < pieces_.size(); ++j) {
    Rational v = dot(pieces_[j].grad, p) + pieces_[j].offset;
    if (v > best) best = v;
  }
  return best;
}

std::vector<std::pair<PLConvex::Piece, Polytope>> PLConvex::active_cells(
    const Polytope& poly) const {
  std::vector<std::pair<Piece, Polytope>> cells;
  for (size_t j = 0; j < pieces_.size(); ++j) {
    std::vector<AffineForm> labels = poly.labels();
    bool degenerate = false;
    for (size_t i = 0; i < pieces_.size() && !degenerate; ++i) {
      if (i == j) continue;
      RatVec n(static_cast<size_t>(dim_));
      for (int c = 0; c < dim_; ++c)
        n[static_cast<size_t>(c)] = pieces_[j].grad[static_cast<size_t>(c)] -
                                    pieces_[i].grad[static_cast<size_t>(c)];
      bool zero = true;
      for (const auto& q : n)
        if (q != 0) zero = false;
      if (zero) {
        // parallel pieces: j survives only when its offset dominates
        if (pieces_[j].offset < pieces_[i].offset) degenerate = true;
        continue;
      }
      labels.push_back(AffineForm::normalized(n, pieces_[j].offset - pieces_[i].offset));
    }
    if (degenerate) continue;
    try {
      cells.emplace_back(pieces_[j], Polytope::from_halfspaces(std::move(labels), true));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::EmptyInterior) throw;  // piece never active: skip
    }
  }
  if (cells.empty()) fail(ErrorCode::NonConvexPieces, "no piece is active on the polytope");
  return cells;
}

PLConvex PLConvex::pruned_on(const Polytope& poly) const {
  std::vector<Piece> kept;
  for (const auto& [piece, cell] : active_cells(poly)) kept.push_back(piece);
  return from_pieces(std::move(kept));
}

double ExtremalAffine::eval(const std::vector<double>& p) const {
  double v = c;
  for (size_t i = 0; i < xi.size(); ++i) v += xi[i] * p[i];
  return v;
}

namespace {

RationalPoly affine_poly(int dim, const RatVec& grad, const Rational& offset) {
  RationalPoly p = RationalPoly::constant(dim, offset);
  for (int i = 0; i < dim; ++i)
    p += RationalPoly::variable(dim, i) * grad[static_cast<size_t>(i)];
  return p;
}

bool float_is_zero(double value, double scale) { return std::abs(value) <= 1e-12 * (1.0 + scale); }

}  // namespace

namespace internal {

Scalar slope_unchecked(const Polytope& poly, const WeightFn& v, const WeightFn& w, int order) {
  double boundary_v = integrate_boundary(poly, v.fn, order);
  double interior_w = integrate_interior(poly, w.fn, order);
  double abs_w = integrate_interior(
      poly, [&](const std::vector<double>& p) { return std::abs(w.fn(p)); }, order);

  // the float value stays float-computed so the two pipelines remain
  // independent cross-checks of each other
  Scalar out;
  bool degenerate = float_is_zero(interior_w, abs_w);
  out.value = degenerate ? 1.0 : 2.0 * boundary_v / interior_w;
  if (v.poly && w.poly) {
    Rational bv = integrate_boundary_exact_poly(poly, *v.poly);
    Rational iw = integrate_exact_poly(poly, *w.poly);
    out.exact = (iw == 0) ? Rational(1) : 2 * bv / iw;
    if (degenerate != (iw == 0)) out.value = out.exact->get_d();  // trust the exact branch test
  }
  return out;
}

Scalar futaki_unchecked(const Polytope& poly, const WeightFn& v, const WeightFn& w,
                        const PLConvex& f, const Scalar& c, int order) {
  auto cells = f.active_cells(poly);
  const bool exact_ok = v.poly && w.poly && c.exact.has_value();

  double boundary = 0, interior = 0;
  Rational boundary_exact = 0, interior_exact = 0;
  for (const auto& [piece, cell] : cells) {
    auto piece_value = [&piece](const std::vector<double>& p) {
      double s = piece.offset.get_d();
      for (size_t i = 0; i < piece.grad.size(); ++i) s += piece.grad[i].get_d() * p[i];
      return s;
    };
    interior += integrate_interior(
        cell, [&](const std::vector<double>& p) { return piece_value(p) * w.fn(p); }, order);
    for (const auto& facet : cell.facets()) {
      const AffineForm& lf = cell.labels()[facet.label];
      bool from_boundary = false;
      for (const auto& pl : poly.labels())
        if (pl.normal == lf.normal && pl.offset == lf.offset) from_boundary = true;
      if (!from_boundary) continue;
      boundary += integrate_facet(
          cell, facet, [&](const std::vector<double>& p) { return piece_value(p) * v.fn(p); },
          order);
    }
    if (exact_ok) {
      RationalPoly fj = affine_poly(poly.dim(), piece.grad, piece.offset);
      interior_exact += integrate_exact_poly(cell, fj * *w.poly);
      for (const auto& facet : cell.facets()) {
        const AffineForm& lf = cell.labels()[facet.label];
        bool from_boundary = false;
        for (const auto& pl : poly.labels())
          if (pl.normal == lf.normal && pl.offset == lf.offset) from_boundary = true;
        if (!from_boundary) continue;
        boundary_exact += integrate_facet_exact_poly(cell, facet, fj * *v.poly);
      }
    }
  }

  Scalar out;
  out.value = 2.0 * boundary - c.value * interior;
  if (exact_ok) out.exact = 2 * boundary_exact - *c.exact * interior_exact;
  return out;
}

}  // namespace internal

namespace {

void require_positive(const WeightExpr& v, const Polytope& poly, const char* which) {
  if (!is_positive_on(v, poly))
    fail(ErrorCode::PositivityViolation, std::string(which) + " must be positive on the polytope");
}

}  // namespace

Scalar slope(const Polytope& poly, const WeightExpr& v, const WeightExpr& w, int order) {
  require_positive(v, poly, "v");
  return internal::slope_unchecked(poly, WeightFn::from(v), WeightFn::from(w), order);
}

Scalar futaki(const Polytope& poly, const WeightExpr& v, const WeightExpr& w, const PLConvex& f,
              const Scalar& c, int order) {
  return internal::futaki_unchecked(poly, WeightFn::from(v), WeightFn::from(w), f, c, order);
}

ExtremalAffine solve_w_ext(const Polytope& poly, const WeightExpr& v, const WeightExpr& w,
                           int order) {
  require_positive(w, poly, "w");
  const int dim = poly.dim();
  const int n = dim + 1;
  WeightFn vf = WeightFn::from(v), wf = WeightFn::from(w);

  auto basis_value = [dim](int a, const std::vector<double>& p) {
    return a == 0 ? 1.0 : p[static_cast<size_t>(a - 1)];
  };

  std::vector<std::vector<double>> gram(static_cast<size_t>(n), std::vector<double>(static_cast<size_t>(n)));
  std::vector<double> rhs(static_cast<size_t>(n));
  for (int a = 0; a < n; ++a) {
    for (int b = a; b < n; ++b) {
      double g = integrate_interior(
          poly,
          [&](const std::vector<double>& p) {
            return basis_value(a, p) * basis_value(b, p) * wf.fn(p);
          },
          order);
      gram[static_cast<size_t>(a)][static_cast<size_t>(b)] = g;
      gram[static_cast<size_t>(b)][static_cast<size_t>(a)] = g;
    }
    rhs[static_cast<size_t>(a)] = 2.0 * integrate_boundary(
                                            poly,
                                            [&](const std::vector<double>& p) {
                                              return basis_value(a, p) * vf.fn(p);
                                            },
                                            order);
  }

  std::vector<double> x;
  if (!solve_linear(gram, rhs, x))
    fail(ErrorCode::SingularGram, "w-weighted Gram matrix is singular");

  ExtremalAffine out;
  out.c = x[0];
  out.xi.assign(x.begin() + 1, x.end());

  // condition number estimate via the explicit inverse, inf-norm
  {
    double norm = 0, inv_norm = 0;
    for (int r = 0; r < n; ++r) {
      double s = 0;
      for (int cidx = 0; cidx < n; ++cidx) s += std::abs(gram[static_cast<size_t>(r)][static_cast<size_t>(cidx)]);
      norm = std::max(norm, s);
    }
    std::vector<std::vector<double>> inv_rows(static_cast<size_t>(n));
    for (int cidx = 0; cidx < n; ++cidx) {
      std::vector<double> e(static_cast<size_t>(n), 0.0);
      e[static_cast<size_t>(cidx)] = 1.0;
      std::vector<double> col;
      solve_linear(gram, e, col);
      for (int r = 0; r < n; ++r) inv_rows[static_cast<size_t>(r)].push_back(col[static_cast<size_t>(r)]);
    }
    for (int r = 0; r < n; ++r) {
      double s = 0;
      for (double entry : inv_rows[static_cast<size_t>(r)]) s += std::abs(entry);
      inv_norm = std::max(inv_norm, s);
    }
    out.gram_condition = norm * inv_norm;
  }

  double max_residual = 0;
  for (int a = 0; a < n; ++a) {
    double lhs = 0;
    for (int b = 0; b < n; ++b)
      lhs += gram[static_cast<size_t>(a)][static_cast<size_t>(b)] * x[static_cast<size_t>(b)];
    max_residual = std::max(max_residual, std::abs(lhs - rhs[static_cast<size_t>(a)]));
  }
  out.max_orthogonality_residual = max_residual;

  if (vf.poly && wf.poly) {
    std::vector<RatVec> gram_exact(static_cast<size_t>(n), RatVec(static_cast<size_t>(n)));
    RatVec rhs_exact(static_cast<size_t>(n));
    auto basis_poly = [dim](int a) {
      return a == 0 ? RationalPoly::constant(dim, Rational(1)) : RationalPoly::variable(dim, a - 1);
    };
    for (int a = 0; a < n; ++a) {
      for (int b = a; b < n; ++b) {
        Rational g = integrate_exact_poly(poly, basis_poly(a) * basis_poly(b) * *wf.poly);
        gram_exact[static_cast<size_t>(a)][static_cast<size_t>(b)] = g;
        gram_exact[static_cast<size_t>(b)][static_cast<size_t>(a)] = g;
      }
      rhs_exact[static_cast<size_t>(a)] =
          2 * integrate_boundary_exact_poly(poly, basis_poly(a) * *vf.poly);
    }
    RatVec coeffs;
    if (!solve_linear(gram_exact, rhs_exact, coeffs))
      fail(ErrorCode::SingularGram, "w-weighted Gram matrix is singular");
    out.exact = coeffs;
  }
  return out;
}

Scalar relative_futaki(const Polytope& poly, const WeightExpr& v, const WeightExpr& w,
                       const PLConvex& f, int order) {
  ExtremalAffine ext = solve_w_ext(poly, v, w, order);
  WeightFn wf = WeightFn::from(w);
  WeightFn weighted;
  weighted.fn = [wfn = wf.fn, ext](const std::vector<double>& p) { return wfn(p) * ext.eval(p); };
  if (wf.poly && ext.exact) {
    RatVec grad(ext.exact->begin() + 1, ext.exact->end());
    weighted.poly = *wf.poly * affine_poly(poly.dim(), grad, (*ext.exact)[0]);
  }
  return internal::futaki_unchecked(poly, WeightFn::from(v), weighted, f,
                                    Scalar::of(Rational(1)), order);
}

std::vector<ScanEntry> scan_destabilizers(const Polytope& poly, const WeightExpr& v,
                                          const WeightExpr& w, const ScanGrid& grid, int order,
                                          int threads) {
  require_positive(v, poly, "v");
  WeightFn vf = WeightFn::from(v), wf = WeightFn::from(w);
  Scalar c = internal::slope_unchecked(poly, vf, wf, order);

  const int dim = poly.dim();
  std::vector<PLConvex> family;
  std::vector<long long> a(static_cast<size_t>(dim), -grid.direction_range);
  while (true) {
    bool nonzero = false;
    for (long long e : a)
      if (e != 0) nonzero = true;
    if (nonzero) {
      for (long long b = -grid.offset_range; b <= grid.offset_range; ++b) {
        RatVec grad(static_cast<size_t>(dim));
        for (int i = 0; i < dim; ++i)
          grad[static_cast<size_t>(i)] = make_ratio(static_cast<long>(a[static_cast<size_t>(i)]),
                                                    static_cast<long>(grid.direction_den));
        Rational offset = make_ratio(static_cast<long>(b), static_cast<long>(grid.offset_den));
        // keep only creases crossing the interior
        int pos = 0, neg = 0;
        for (const auto& vertex : poly.vertices()) {
          int s = sgn(dot(grad, vertex) + offset);
          if (s > 0) ++pos;
          if (s < 0) ++neg;
        }
        if (pos == 0 || neg == 0) continue;
        family.push_back(PLConvex::from_pieces(
            {PLConvex::Piece{grad, offset}, PLConvex::Piece{RatVec(static_cast<size_t>(dim), Rational(0)), Rational(0)}}));
      }
    }
    int axis = dim - 1;
    while (axis >= 0) {
      if (a[static_cast<size_t>(axis)] < grid.direction_range) {
        ++a[static_cast<size_t>(axis)];
        for (int i = axis + 1; i < dim; ++i) a[static_cast<size_t>(i)] = -grid.direction_range;
        break;
      }
      --axis;
    }
    if (axis < 0) break;
  }

  std::vector<ScanEntry> out(family.size());
  auto evaluate_range = [&](size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i)
      out[i] = ScanEntry{family[i], internal::futaki_unchecked(poly, vf, wf, family[i], c, order)};
  };
  if (threads <= 1 || family.size() < 2) {
    evaluate_range(0, family.size());
  } else {
    size_t chunk = (family.size() + static_cast<size_t>(threads) - 1) / static_cast<size_t>(threads);
    std::vector<std::future<void>> futures;
    for (size_t begin = 0; begin < family.size(); begin += chunk)
      futures.push_back(std::async(std::launch::async, evaluate_range, begin,
                                   std::min(begin + chunk, family.size())));
    for (auto& f : futures) f.get();
  }

  std::stable_sort(out.begin(), out.end(), [](const ScanEntry& lhs, const ScanEntry& rhs) {
    if (lhs.value.value != rhs.value.value) return lhs.value.value < rhs.value.value;
    return lhs.f.pieces()[0].grad < rhs.f.pieces()[0].grad;
  });
  return out;
}

}  // namespace wkstab
