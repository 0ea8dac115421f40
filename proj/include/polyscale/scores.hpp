#pragma once

#include "polyscale/common.hpp"
#include "polyscale/geometry.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace polyscale::scores {

// Per-point face scores: row i, column k holds xi_k of sample point i,
// i.e. (k+1)^{-1} times the number of k-faces of the hull containing it.
// Column sums therefore reproduce the face vector exactly.
Mat xi_k_scores(const geometry::HullComplex& hull);

// Vertex-local defect-volume scores on the sample points inside the chart
// box of vertex `vertex` (side delta0). For each hull vertex x in the box,
// the score is lambda/d times the volume of the cone over its inward-facing
// hull facets (chart normals componentwise <= 0, facet inside the box),
// clipped to the box and to the body, minus the hull. d=2 is exact polygon
// clipping; d=3 uses Monte Carlo volume (1e5 proposals) with the standard
// error recorded.
struct XiVResult {
  std::vector<double> xi_v;   // size n; zero off hull vertices / outside box
  std::vector<double> mc_se;  // Monte Carlo standard error (0 for exact paths)
};
XiVResult xi_v_scores_vertex(const std::vector<Vec>& sample,
                             const geometry::SimplePolytope& K, int vertex,
                             double delta0, double lambda,
                             const geometry::HullComplex& hull,
                             std::uint64_t seed = 0);

// Vol(K) minus the volume of the hull of the sample.
double defect_volume(const geometry::SimplePolytope& K,
                     const geometry::HullComplex& hull,
                     const std::vector<Vec>& sample);

// Split a per-point score total Z into per-vertex-box sums Z_i (chart box of
// side delta at each vertex of K) and the remainder Z0 = Z - sum_i Z_i.
struct ZDecomposition {
  double Z = 0.0;
  std::vector<double> Zi;   // one entry per vertex of K
  double Z0 = 0.0;
  std::vector<int> box_id;  // per sample point; -1 if outside every box
};
ZDecomposition z_decomposition(const std::vector<Vec>& sample,
                               const geometry::SimplePolytope& K, double delta,
                               const std::vector<double>& per_point_score);

// Diagnostic: do all faces of the local hull (sample restricted to the
// chart box of `vertex`) that consist of global hull vertices qualify as
// cone-extreme? Vacuously true with d or fewer local points.
bool local_faces_cone_extreme(const std::vector<Vec>& sample,
                              const geometry::SimplePolytope& K, int vertex,
                              double delta0, const geometry::HullComplex& hull);

struct ScoreTable {
  int d = 0;
  std::vector<Vec> points;
  std::vector<char> is_hull_vertex;
  Mat xi;                    // n x d, column k = xi_k
  std::vector<double> xi_v;  // union over all vertex boxes
  std::vector<int> vertex_box_id;
  double Z = 0.0;                // total xi_0 mass
  std::vector<double> Zi;        // per-vertex xi_0 sums
};

ScoreTable build_score_table(const std::vector<Vec>& sample,
                             const geometry::SimplePolytope& K, double lambda,
                             double delta0, std::uint64_t seed = 0);

void write_score_table_csv(const std::string& path, const ScoreTable& table);

}  // namespace polyscale::scores
