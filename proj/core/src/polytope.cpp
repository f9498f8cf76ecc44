#include "wkstab/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <numeric>
#include <set>

#include "wkstab/errors.hpp"

namespace wkstab {

Rational AffineForm::eval(const RatVec& p) const { return dot(normal, p) + offset; }

double AffineForm::eval(const std::vector<double>& p) const {
  double s = offset.get_d();
  for (size_t i = 0; i < normal.size(); ++i) s += static_cast<double>(normal[i]) * p[i];
  return s;
}

double AffineForm::norm2() const {
  double s = 0;
  for (long long n : normal) s += static_cast<double>(n) * static_cast<double>(n);
  return std::sqrt(s);
}

bool is_primitive(const IntVec& normal) {
  long long g = 0;
  for (long long n : normal) g = std::gcd(g, n < 0 ? -n : n);
  return g == 1;
}

AffineForm AffineForm::normalized(const RatVec& normal, const Rational& offset) {
  mpz_class den_lcm = 1;
  for (const auto& q : normal) mpz_lcm(den_lcm.get_mpz_t(), den_lcm.get_mpz_t(), q.get_den().get_mpz_t());
  mpz_class num_gcd = 0;
  std::vector<mpz_class> scaled(normal.size());
  for (size_t i = 0; i < normal.size(); ++i) {
    scaled[i] = normal[i].get_num() * (den_lcm / normal[i].get_den());
    mpz_gcd(num_gcd.get_mpz_t(), num_gcd.get_mpz_t(), scaled[i].get_mpz_t());
  }
  if (num_gcd == 0) fail(ErrorCode::NonPrimitiveNormal, "zero normal vector");
  AffineForm out;
  out.normal.resize(normal.size());
  for (size_t i = 0; i < normal.size(); ++i) {
    mpz_class c = scaled[i] / num_gcd;
    if (!c.fits_slong_p()) fail(ErrorCode::NonPrimitiveNormal, "normal entry out of range");
    out.normal[i] = c.get_si();
  }
  // offset scales with the same positive factor den_lcm / num_gcd
  out.offset = offset * Rational(den_lcm, num_gcd);
  out.offset.canonicalize();
  return out;
}

namespace {

// 1-dimensional rational nullspace of a rank-(n-1) set of row vectors in R^n.
std::optional<RatVec> nullspace_direction(std::vector<RatVec> rows, int n) {
  // RREF
  std::vector<int> pivot_col;
  size_t r = 0;
  for (int col = 0; col < n && r < rows.size(); ++col) {
    size_t piv = r;
    while (piv < rows.size() && rows[piv][col] == 0) ++piv;
    if (piv == rows.size()) continue;
    std::swap(rows[piv], rows[r]);
    Rational lead = rows[r][col];
    for (int c = 0; c < n; ++c) rows[r][c] /= lead;
    for (size_t i = 0; i < rows.size(); ++i) {
      if (i == r || rows[i][col] == 0) continue;
      Rational f = rows[i][col];
      for (int c = 0; c < n; ++c) rows[i][c] -= f * rows[r][c];
    }
    pivot_col.push_back(col);
    ++r;
  }
  if (static_cast<int>(r) != n - 1) return std::nullopt;
  std::vector<bool> is_pivot(n, false);
  for (int c : pivot_col) is_pivot[c] = true;
  int free_col = 0;
  while (free_col < n && is_pivot[free_col]) ++free_col;
  RatVec dir(n, Rational(0));
  dir[free_col] = 1;
  for (size_t i = 0; i < pivot_col.size(); ++i) dir[pivot_col[i]] = -rows[i][free_col];
  return dir;
}

bool in_recession_cone(const std::vector<AffineForm>& labels, const RatVec& d) {
  bool nonzero = false;
  for (const auto& q : d)
    if (q != 0) nonzero = true;
  if (!nonzero) return false;
  for (const auto& l : labels)
    if (sgn(dot(l.normal, d)) < 0) return false;
  return true;
}

// Exhaustive extreme-ray candidates: nullspaces of (dim-1)-subsets of normals
// plus the coordinate axes. Complete for pointed cones.
bool region_is_unbounded(const std::vector<AffineForm>& labels, int dim) {
  std::vector<int> idx(labels.size());
  std::iota(idx.begin(), idx.end(), 0);

  std::vector<int> subset(static_cast<size_t>(dim > 0 ? dim - 1 : 0));
  std::vector<RatVec> candidates;
  for (int i = 0; i < dim; ++i) {
    RatVec e(dim, Rational(0));
    e[i] = 1;
    candidates.push_back(e);
  }

  auto emit = [&](const std::vector<int>& chosen) {
    std::vector<RatVec> rows;
    for (int i : chosen) rows.push_back(to_rational(labels[i].normal));
    if (auto d = nullspace_direction(std::move(rows), dim)) candidates.push_back(*d);
  };

  // iterate over (dim-1)-subsets
  if (dim >= 2) {
    std::vector<int> comb(static_cast<size_t>(dim - 1));
    auto rec = [&](auto&& self, size_t pos, int start) -> void {
      if (pos == comb.size()) {
        emit(comb);
        return;
      }
      for (int i = start; i < static_cast<int>(labels.size()); ++i) {
        comb[pos] = i;
        self(self, pos + 1, i + 1);
      }
    };
    rec(rec, 0, 0);
  }

  for (const auto& d : candidates) {
    RatVec neg(d.size());
    for (size_t i = 0; i < d.size(); ++i) neg[i] = -d[i];
    if (in_recession_cone(labels, d) || in_recession_cone(labels, neg)) return true;
  }
  return false;
}

int affine_rank(const std::vector<RatVec>& points) {
  if (points.size() <= 1) return 0;
  std::vector<RatVec> rows;
  for (size_t i = 1; i < points.size(); ++i) {
    RatVec row(points[0].size());
    for (size_t c = 0; c < row.size(); ++c) row[c] = points[i][c] - points[0][c];
    rows.push_back(std::move(row));
  }
  return rank(std::move(rows));
}

RatVec average(const std::vector<RatVec>& points) {
  RatVec c(points[0].size(), Rational(0));
  for (const auto& p : points)
    for (size_t i = 0; i < c.size(); ++i) c[i] += p[i];
  Rational inv = Rational(1, static_cast<unsigned long>(points.size()));
  for (auto& q : c) q *= inv;
  return c;
}

// Recursive fan decomposition over the face lattice. `face` is a vertex-id
// set spanning affine dimension d; sub-faces are cut out by additional tight
// labels. Every simplex comes back as explicit rational coordinates because
// face barycenters are not polytope vertices.
void triangulate_face(const Polytope& poly, const std::vector<int>& face_ids, int d,
                      std::vector<std::vector<RatVec>>& out) {
  std::vector<RatVec> pts;
  pts.reserve(face_ids.size());
  for (int id : face_ids) pts.push_back(poly.vertices()[id]);

  if (static_cast<int>(face_ids.size()) == d + 1) {
    out.push_back(std::move(pts));
    return;
  }

  RatVec center = average(pts);
  std::set<std::vector<int>> seen;
  for (size_t li = 0; li < poly.labels().size(); ++li) {
    std::vector<int> sub;
    for (int id : face_ids)
      if (poly.labels()[li].eval(poly.vertices()[id]) == 0) sub.push_back(id);
    if (sub.empty() || sub.size() == face_ids.size()) continue;
    std::vector<RatVec> sub_pts;
    for (int id : sub) sub_pts.push_back(poly.vertices()[id]);
    if (affine_rank(sub_pts) != d - 1) continue;
    if (!seen.insert(sub).second) continue;
    std::vector<std::vector<RatVec>> lower;
    triangulate_face(poly, sub, d - 1, lower);
    for (auto& simplex : lower) {
      simplex.push_back(center);
      out.push_back(std::move(simplex));
    }
  }
}

}  // namespace

Polytope Polytope::from_halfspaces(std::vector<AffineForm> labels, bool prune_redundant) {
  if (labels.empty()) fail(ErrorCode::EmptyInterior, "no labels");
  const int dim = static_cast<int>(labels[0].normal.size());
  for (const auto& l : labels) {
    if (static_cast<int>(l.normal.size()) != dim)
      fail(ErrorCode::DimensionMismatch, "labels of mixed dimension");
    if (!is_primitive(l.normal))
      fail(ErrorCode::NonPrimitiveNormal, "label normal must be a primitive integer vector");
  }
  // exact duplicates would double-count boundary mass
  {
    std::vector<AffineForm> unique;
    for (auto& l : labels) {
      bool seen = false;
      for (const auto& u : unique)
        if (u.normal == l.normal && u.offset == l.offset) seen = true;
      if (!seen) {
        unique.push_back(std::move(l));
      } else if (!prune_redundant) {
        fail(ErrorCode::RedundantLabel, "duplicate label");
      }
    }
    labels = std::move(unique);
  }

  if (static_cast<int>(labels.size()) < dim + 1)
    fail(ErrorCode::UnboundedRegion, "fewer than dim+1 labels cannot bound a region");

  if (region_is_unbounded(labels, dim))
    fail(ErrorCode::UnboundedRegion, "half-space intersection has a recession direction");

  // Vertex candidates: every dim-subset of labels with an invertible normal matrix.
  std::vector<RatVec> vertices;
  std::vector<int> comb(static_cast<size_t>(dim));
  auto try_vertex = [&](const std::vector<int>& chosen) {
    std::vector<RatVec> a;
    RatVec rhs;
    for (int i : chosen) {
      a.push_back(to_rational(labels[i].normal));
      rhs.push_back(-labels[i].offset);
    }
    RatVec p;
    if (!solve_linear(std::move(a), std::move(rhs), p)) return;
    for (const auto& l : labels)
      if (sgn(l.eval(p)) < 0) return;
    vertices.push_back(std::move(p));
  };
  auto rec = [&](auto&& self, size_t pos, int start) -> void {
    if (pos == comb.size()) {
      try_vertex(comb);
      return;
    }
    for (int i = start; i < static_cast<int>(labels.size()); ++i) {
      comb[pos] = i;
      self(self, pos + 1, i + 1);
    }
  };
  rec(rec, 0, 0);

  std::sort(vertices.begin(), vertices.end());
  vertices.erase(std::unique(vertices.begin(), vertices.end()), vertices.end());

  if (vertices.empty()) fail(ErrorCode::EmptyInterior, "half-space intersection is empty");
  if (affine_rank(vertices) != dim)
    fail(ErrorCode::EmptyInterior, "half-space intersection is not full-dimensional");

  Polytope poly;
  poly.dim_ = dim;
  poly.vertices_ = std::move(vertices);

  // Facets: labels tight on an affinely (dim-1)-dimensional vertex set.
  std::vector<AffineForm> kept;
  for (auto& label : labels) {
    std::vector<int> tight;
    for (size_t v = 0; v < poly.vertices_.size(); ++v)
      if (label.eval(poly.vertices_[v]) == 0) tight.push_back(static_cast<int>(v));
    std::vector<RatVec> tight_pts;
    for (int id : tight) tight_pts.push_back(poly.vertices_[id]);
    bool supports_facet =
        !tight.empty() && (dim == 1 || affine_rank(tight_pts) == dim - 1);
    if (!supports_facet) {
      if (prune_redundant) continue;
      fail(ErrorCode::RedundantLabel, "label supports no facet of the region");
    }
    Facet f;
    f.label = static_cast<int>(kept.size());
    f.vertex_ids = std::move(tight);
    f.density = 1.0 / label.norm2();
    kept.push_back(std::move(label));
    poly.facets_.push_back(std::move(f));
  }
  poly.labels_ = std::move(kept);
  return poly;
}

Containment Polytope::contains(const RatVec& p) const {
  if (static_cast<int>(p.size()) != dim_)
    fail(ErrorCode::DimensionMismatch, "point dimension does not match polytope");
  Containment result;
  result.location = Location::Interior;
  for (size_t i = 0; i < labels_.size(); ++i) {
    int s = sgn(labels_[i].eval(p));
    if (s < 0) return {Location::Outside, {}};
    if (s == 0) result.facet_labels.push_back(static_cast<int>(i));
  }
  if (!result.facet_labels.empty()) result.location = Location::Boundary;
  return result;
}

LatticePointSet Polytope::lattice_points(int k) const {
  if (k < 1) fail(ErrorCode::DomainError, "dilation k must be >= 1");
  auto [lo, hi] = bounding_box();
  std::vector<long long> lo_i(dim_), hi_i(dim_);
  for (int i = 0; i < dim_; ++i) {
    Rational a = lo[i] * k, b = hi[i] * k;
    mpz_class fl, ce;
    mpz_cdiv_q(fl.get_mpz_t(), a.get_num().get_mpz_t(), a.get_den().get_mpz_t());
    mpz_fdiv_q(ce.get_mpz_t(), b.get_num().get_mpz_t(), b.get_den().get_mpz_t());
    lo_i[i] = fl.get_si();
    hi_i[i] = ce.get_si();
  }

  // membership of lambda/k: <n, lambda> + k*offset >= 0, all exact
  std::vector<Rational> scaled_offsets(labels_.size());
  for (size_t j = 0; j < labels_.size(); ++j) scaled_offsets[j] = labels_[j].offset * k;

  LatticePointSet out;
  out.k = k;
  IntVec lambda(lo_i.begin(), lo_i.end());
  while (true) {
    bool inside = true;
    for (size_t j = 0; j < labels_.size() && inside; ++j) {
      Rational v = scaled_offsets[j];
      for (int i = 0; i < dim_; ++i)
        v += Rational(static_cast<long>(labels_[j].normal[i])) * Rational(static_cast<long>(lambda[i]));
      if (sgn(v) < 0) inside = false;
    }
    if (inside) out.points.push_back(lambda);
    int axis = dim_ - 1;
    while (axis >= 0) {
      if (lambda[axis] < hi_i[axis]) {
        ++lambda[axis];
        for (int i = axis + 1; i < dim_; ++i) lambda[i] = lo_i[i];
        break;
      }
      --axis;
    }
    if (axis < 0) break;
  }
  // odometer order with the last axis fastest is already lexicographic
  return out;
}

RatVec Polytope::centroid() const { return average(vertices_); }

std::pair<RatVec, RatVec> Polytope::bounding_box() const {
  RatVec lo = vertices_[0], hi = vertices_[0];
  for (const auto& v : vertices_)
    for (int i = 0; i < dim_; ++i) {
      if (v[i] < lo[i]) lo[i] = v[i];
      if (v[i] > hi[i]) hi[i] = v[i];
    }
  return {lo, hi};
}

double Polytope::inradius() const {
  RatVec c = centroid();
  double best = std::numeric_limits<double>::infinity();
  for (const auto& l : labels_) best = std::min(best, l.eval(c).get_d() / l.norm2());
  return best;
}

std::vector<Simplex> Polytope::triangulate_interior() const {
  std::vector<int> all(vertices_.size());
  std::iota(all.begin(), all.end(), 0);
  std::vector<std::vector<RatVec>> raw;
  triangulate_face(*this, all, dim_, raw);
  std::vector<Simplex> out;
  out.reserve(raw.size());
  for (auto& pts : raw) {
    Simplex s{std::move(pts)};
    if (simplex_volume(s) != 0) out.push_back(std::move(s));
  }
  return out;
}

std::vector<Simplex> Polytope::triangulate_facet(const Facet& facet) const {
  std::vector<std::vector<RatVec>> raw;
  triangulate_face(*this, facet.vertex_ids, dim_ - 1, raw);
  std::vector<Simplex> out;
  out.reserve(raw.size());
  for (auto& pts : raw) {
    Simplex s{std::move(pts)};
    if (dim_ == 1 || facet_simplex_measure(s, labels_[facet.label].normal) != 0)
      out.push_back(std::move(s));
  }
  return out;
}

Polytope Polytope::shrink(const Rational& eps) const {
  std::vector<AffineForm> shrunk = labels_;
  for (auto& l : shrunk) l.offset -= eps;
  return from_halfspaces(std::move(shrunk));
}

nlohmann::json Polytope::to_json() const {
  nlohmann::json j;
  j["dim"] = dim_;
  j["labels"] = nlohmann::json::array();
  for (const auto& l : labels_) {
    nlohmann::json jl;
    jl["normal"] = l.normal;
    jl["offset"] = to_string(l.offset);
    j["labels"].push_back(jl);
  }
  return j;
}

Polytope Polytope::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("labels") || !j["labels"].is_array())
    fail(ErrorCode::SchemaError, "polytope: expected {dim, labels:[...]}");
  std::vector<AffineForm> labels;
  for (const auto& jl : j["labels"]) {
    if (!jl.contains("normal") || !jl["normal"].is_array() || !jl.contains("offset"))
      fail(ErrorCode::SchemaError, "polytope.labels[]: expected {normal:[...], offset}");
    AffineForm l;
    for (const auto& n : jl["normal"]) {
      if (!n.is_number_integer()) fail(ErrorCode::SchemaError, "polytope normal entries must be integers");
      l.normal.push_back(n.get<long long>());
    }
    const auto& off = jl["offset"];
    if (off.is_string())
      l.offset = rational_from_string(off.get<std::string>());
    else if (off.is_number_integer())
      l.offset = Rational(off.get<long>());
    else
      fail(ErrorCode::SchemaError, "polytope offsets must be exact (string or integer)");
    labels.push_back(std::move(l));
  }
  if (j.contains("dim") && j["dim"].is_number_integer() && !labels.empty() &&
      j["dim"].get<int>() != static_cast<int>(labels[0].normal.size()))
    fail(ErrorCode::SchemaError, "polytope dim does not match label normals");
  return from_halfspaces(std::move(labels));
}

Rational simplex_volume(const Simplex& s) {
  const size_t d = s.vertices.size() - 1;
  std::vector<RatVec> rows;
  for (size_t i = 1; i <= d; ++i) {
    RatVec row(d);
    for (size_t c = 0; c < d; ++c) row[c] = s.vertices[i][c] - s.vertices[0][c];
    rows.push_back(std::move(row));
  }
  Rational det = determinant(std::move(rows));
  if (det < 0) det = -det;
  mpz_class fact;
  mpz_fac_ui(fact.get_mpz_t(), static_cast<unsigned long>(d));
  return det / Rational(fact);
}

Rational facet_simplex_measure(const Simplex& s, const IntVec& normal) {
  const size_t ambient = normal.size();
  const size_t d = s.vertices.size() - 1;  // = ambient - 1
  if (ambient == 1) return Rational(1);    // point mass
  std::vector<RatVec> rows;
  for (size_t i = 1; i <= d; ++i) {
    RatVec row(ambient);
    for (size_t c = 0; c < ambient; ++c) row[c] = s.vertices[i][c] - s.vertices[0][c];
    rows.push_back(std::move(row));
  }
  rows.push_back(to_rational(normal));
  Rational det = determinant(std::move(rows));
  if (det < 0) det = -det;
  Rational nn = dot(normal, to_rational(normal));
  mpz_class fact;
  mpz_fac_ui(fact.get_mpz_t(), static_cast<unsigned long>(d));
  return det / (nn * Rational(fact));
}

}  // namespace wkstab
