#pragma once

#include "polyscale/common.hpp"
#include "polyscale/geometry.hpp"
#include "polyscale/rescale.hpp"

#include <string>
#include <vector>

namespace polyscale::floating {

// Axis-aligned Macbeath-style region around a center z > 0: the box
// prod_i [z_i/2, 3 z_i/2], of volume prod_i z_i. Dyadic members carry the
// integer code (k_1,...,k_d) with z_i = 3^{k_i} delta.
struct MRegion {
  Vec center;
  Vec lo, hi;
  std::vector<int> code;  // empty when not dyadic
  double delta = 0.0;
};

MRegion make_mregion(const Vec& z);

bool regions_overlap_interior(const MRegion& a, const MRegion& b);
bool regions_overlap_closed(const MRegion& a, const MRegion& b);

// Minimum cap volume over half-spaces through z. Box bodies near a corner
// use the exact corner-simplex value (d^d/d!) prod_i min(z_i, L_i - z_i);
// otherwise the minimum is searched over a direction grid (1e4 directions)
// with local refinement, using exact cap volumes (polygon clipping for d=2,
// the box inclusion-exclusion formula for d=3 boxes).
// `force_general` skips the corner fast path (cross-validation only).
double v_function(const Vec& z, const geometry::SimplePolytope& K,
                  bool force_general = false);

// Volume of the positive orthant cut off by the tangent plane of the
// hyperboloid through z0: the simplex with legs d*z0_i, d^d prod z0_i / d!.
double cap_volume_orthant(const Vec& z0);

// Exact volume of {x in prod [0, L_i] : n . x <= c}.
double box_halfspace_volume(const Vec& n, double c, const Vec& L);

// Annulus membership: s <= v(z) < T*.
bool annulus_contains(const Vec& z, const geometry::SimplePolytope& K,
                      const rescale::ScaleParams& params);

// Smallest delta1 >= delta with log_3(T / delta1^d) an integer; the ratio
// delta1/delta lies in [1, 3^{1/d}).
double adjusted_delta(double delta, double T, int d);

// All dyadic M-regions at level m = log_3(T / delta^d): codes k >= 0 with
// sum k_i = m and 3^{k_i} <= 1/(3 delta), centers z_i = 3^{k_i} delta.
// Throws NonIntegerDyadicLevel when m is not an integer.
std::vector<MRegion> dyadic_collection(double delta, const rescale::ScaleParams& params,
                                       int d);

// Code rounding around a probe point: k_i = floor(log_3(2 z_i / delta)),
// clamped to the collection cap 3^{k_i} <= 1/(3 delta).
MRegion rounded_region(const Vec& z, double delta);

// Deterministic low-discrepancy net of up to n points on the surface
// {prod z_i = T} with every coordinate in [zmin, min(zmax, 1/3)] (the 1/3
// cap keeps M-regions inside [0,1/2]^d).
std::vector<Vec> probe_net(double T, int d, int n, double zmin, double zmax);

// A collection is maximal when no probe point on the level surface admits
// an M-region with interior disjoint from every member. Collection centers
// are always included among the probes.
bool maximality_check(const std::vector<MRegion>& collection, double delta,
                      const rescale::ScaleParams& params, int d, int probes = 100000);

// Slab width Delta_d used by the annulus covering: 1 for d=2; for d=3 the
// bound max(d/2, d^{d+1}/d!) obtained with the pyramid constant c = 1/(2d)
// in Vol(K cap H+) >= c Delta_d prod z_i.
double slab_width(int d);

void write_mregions_csv(const std::string& path, const std::vector<MRegion>& regions);

}  // namespace polyscale::floating
