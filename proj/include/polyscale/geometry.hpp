#pragma once

#include "polyscale/common.hpp"

#include <cstdint>
#include <optional>

namespace polyscale::geometry {

// Volume preserving affine chart at a polytope vertex: y = A (x - v0),
// with |det A| = 1, mapping the vertex to the origin and the d facets
// through it onto the coordinate hyperplanes.
struct VertexChart {
  Mat A;       // d x d, |det| = 1
  Mat A_inv;   // cached inverse
  Vec vertex;  // chart origin in body coordinates

  Vec to_chart(const Vec& x) const { return A * (x - vertex); }
  Vec from_chart(const Vec& y) const { return vertex + A_inv * y; }
};

// Facet as (unit outward normal, offset): {x : n.x <= c}.
struct Facet {
  Vec normal;
  double offset = 0.0;
};

// Simple polytope: every vertex lies on exactly d facets.
struct SimplePolytope {
  int d = 0;
  std::vector<Vec> vertices;
  std::vector<Facet> facets;
  std::vector<VertexChart> vertex_charts;  // parallel to vertices
  double volume = 0.0;
  bool is_box = false;      // axis-aligned box cornered at origin
  bool is_simplex = false;  // simplex (enables direct sampling)
  Vec box_lo, box_hi;       // bounding box

  bool contains(const Vec& x, double tol = 1e-12) const;

  static SimplePolytope cube(int d, double side = 1.0);
  // Right triangle (0,0),(a,0),(0,a); simple, 3 vertices.
  static SimplePolytope triangle(double a = 1.0);
};

// Boundary face lattice of a convex hull of points in general position.
// Faces of dimension k are stored as sorted input-point index lists.
// For d >= 3 the hull is simplicial (inputs are a.s. in general position),
// so every k-face is a (k+1)-subset of some facet.
struct HullComplex {
  int d = 0;
  int n_input = 0;
  // faces_by_dim[k] = list of k-faces, each a sorted index list of size k+1.
  std::vector<std::vector<std::vector<int>>> faces_by_dim;
  std::vector<Vec> facet_normals;     // parallel to faces_by_dim[d-1]
  std::vector<double> facet_offsets;  // n.x = c on the facet, hull in n.x <= c
  std::vector<int> vertex_ids;        // sorted hull-vertex input indices

  const std::vector<std::vector<int>>& facets() const { return faces_by_dim[d - 1]; }
};

struct FaceCounts {
  Eigen::VectorXi f;  // f[k] = number of k-faces, k = 0..d-1
  // Euler relation for the boundary complex of a d-polytope.
  bool euler_ok() const;
};

// Full boundary face lattice. d=2 monotone chain, d=3 incremental insertion,
// 4 <= d <= 6 brute-force facet enumeration (intended for small n).
// `seed` keys the deterministic perturbation retry on degenerate input.
HullComplex convex_hull(const std::vector<Vec>& points, int d, std::uint64_t seed = 0);

FaceCounts face_counts(const HullComplex& h);

double hull_volume(const HullComplex& h, const std::vector<Vec>& points);

// Cone-extreme classification against the origin's normal cone
// C_0 = (-inf,0)^d. A face qualifies when the relative interior of its
// outward normal cone meets C_0; for a facet this is exactly "normal
// strictly negative". A point is cone-extreme iff it lies on a
// qualifying face, equivalently iff its own normal cone meets C_0.
struct ConeExtremeResult {
  std::vector<std::pair<int, int>> faces;  // (dim k, index into faces_by_dim[k])
  std::vector<char> point_flags;           // size n_input
};
ConeExtremeResult cone_extreme_faces(const HullComplex& h, const std::vector<Vec>& points);

}  // namespace polyscale::geometry
