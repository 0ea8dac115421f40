#pragma once

#include "polyscale/common.hpp"

#include <cmath>
#include <vector>

namespace polyscale::rescale {

// Orthonormal basis of the zero-sum hyperplane V = {x in R^d : sum x_i = 0},
// stored as d-1 rows. Helmert construction, deterministic per d.
struct VBasis {
  int d = 0;
  Mat B;  // (d-1) x d, orthonormal zero-sum rows

  // Coordinates in V of the orthogonal projection of x in R^d.
  Vec project(const Vec& x) const { return B * x; }
  // Embedding of V-coordinates back into R^d; component i is l_i(v).
  Vec embed(const Vec& v) const { return B.transpose() * v; }
};

VBasis v_basis(int d);

// Scale-dependent constants used throughout the small-cap analysis.
struct ScaleParams {
  double lambda = 0.0;
  int d = 0;
  double delta0 = 0.0;  // exp(-(log lambda)^(1/d))
  double beta = 0.0;    // 4d^2 + d - 1
  double alpha = 0.0;   // (6d)^d * beta
  double s = 0.0;       // 1 / (lambda (log lambda)^beta)
  double T = 0.0;       // alpha loglog(lambda) / lambda
  double Tstar = 0.0;   // d 6^d T

  ScaleParams(double lambda_, int d_);
};

// The cone function G(v) = log((1/d) sum_i exp(l_i(v))) together with its
// sandwich constants: c1 |v| - log d <= G(v) <= c2 |v|.
struct ConeFunction {
  int d = 0;
  VBasis basis;
  double c1 = 0.0;
  double c2 = 0.0;

  double operator()(const Vec& v) const;
};

ConeFunction make_cone_function(int d);

// Scaling transform and inverse: forward maps z in (0,inf)^d to
// (p_V(log z) in basis coordinates, (1/d)(log lambda + sum log z_i)).
RescaledPoint forward(const Vec& z, double lambda, const VBasis& basis);
Vec inverse(const RescaledPoint& w, double lambda, const VBasis& basis);

// Membership in the rescaled observation window W_lambda:
// h <= -l_i(v) + log(lambda^(1/d) delta0) for all i.
bool window_contains(const RescaledPoint& w, double lambda, const VBasis& basis);

// Petal of z0: { z : sum_i z0_i / z_i <= d }.
bool petal_contains(const Vec& z0, const Vec& z);
// Halfspace bounded by the hyperplane tangent at z0 to the pseudo-hyperboloid
// through z0, on the side containing the origin: sum_i z_i / z0_i <= d.
bool halfspace_contains(const Vec& z0, const Vec& z);
// Level of the pseudo-hyperboloid through z: prod_i z_i.
double hyperboloid_level(const Vec& z);

// Dual (tangent-witness) cone-extremality test: point i is extreme iff there
// is y > 0 with <z_i, y> = d and <z_q, y> >= d for all q. Solved as an LP
// feasibility problem; ties within 1e-9 count as extreme.
bool cone_extreme_by_petals(const std::vector<Vec>& points, int index);

enum class GrainKind { Up, Down };

// Down grain at apex: h_w - h_apex <= -G(v_w - v_apex).
// Up grain at apex:   h_w - h_apex >=  G(v_apex - v_w).
bool grain_contains(GrainKind kind, const RescaledPoint& apex, const RescaledPoint& w,
                    const ConeFunction& cf);

}  // namespace polyscale::rescale
