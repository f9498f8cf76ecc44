#pragma once

#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <string>
#include <vector>

#include "wkstab/rational.hpp"

namespace wkstab {

// Inward affine label L(p) = <normal, p> + offset with a primitive integer normal.
struct AffineForm {
  IntVec normal;
  Rational offset;

  Rational eval(const RatVec& p) const;
  double eval(const std::vector<double>& p) const;
  double norm2() const;

  // Scales (rational normal, offset) data to a primitive integer normal.
  static AffineForm normalized(const RatVec& normal, const Rational& offset);
};

bool is_primitive(const IntVec& normal);

struct Facet {
  int label = -1;                // index into Polytope::labels()
  std::vector<int> vertex_ids;   // indices into Polytope::vertices()
  double density = 1.0;          // boundary-measure density 1/|normal|_2 (point mass 1 in 1D)
};

// A d-simplex embedded in the ambient space (d+1 rational vertices).
struct Simplex {
  std::vector<RatVec> vertices;
};

enum class Location { Interior, Boundary, Outside };

struct Containment {
  Location location;
  std::vector<int> facet_labels;  // tight labels when on the boundary
};

struct LatticePointSet {
  int k = 1;
  std::vector<IntVec> points;  // lexicographically sorted integer vectors in k*P
};

// Bounded, full-dimensional rational polytope in half-space form with derived
// vertices and facets. Immutable after construction.
class Polytope {
 public:
  static Polytope from_halfspaces(std::vector<AffineForm> labels, bool prune_redundant = false);

  int dim() const { return dim_; }
  const std::vector<AffineForm>& labels() const { return labels_; }
  const std::vector<RatVec>& vertices() const { return vertices_; }
  const std::vector<Facet>& facets() const { return facets_; }

  Containment contains(const RatVec& p) const;
  LatticePointSet lattice_points(int k) const;

  RatVec centroid() const;
  // Axis-aligned rational bounding box as (lower, upper).
  std::pair<RatVec, RatVec> bounding_box() const;
  // Distance from the centroid to the nearest facet (float).
  double inradius() const;

  // Interior fan decomposition into dim()-simplices, deterministic order.
  std::vector<Simplex> triangulate_interior() const;
  // (dim-1)-simplices covering one facet, embedded in the ambient space.
  std::vector<Simplex> triangulate_facet(const Facet& facet) const;

  // Same labels with every offset reduced by eps (label-value shrink).
  Polytope shrink(const Rational& eps) const;

  nlohmann::json to_json() const;
  static Polytope from_json(const nlohmann::json& j);

 private:
  Polytope() = default;

  int dim_ = 0;
  std::vector<AffineForm> labels_;
  std::vector<RatVec> vertices_;
  std::vector<Facet> facets_;
};

// Exact measures used by both quadrature pipelines.
// Lebesgue dim()-volume of an interior simplex.
Rational simplex_volume(const Simplex& s);
// dsigma-measure of a facet simplex against the facet's primitive normal:
// |det(edges, normal)| / (<normal, normal> * (dim-1)!).
Rational facet_simplex_measure(const Simplex& s, const IntVec& normal);

}  // namespace wkstab
