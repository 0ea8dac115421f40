#include "polyscale/rescale.hpp"
#include "polyscale/linprog.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace polyscale::rescale {

VBasis v_basis(int d) {
  if (d < 2) throw DimensionUnsupported("v_basis requires d >= 2");
  VBasis vb;
  vb.d = d;
  vb.B = Mat::Zero(d - 1, d);
  // Helmert rows: row k has k leading entries 1 and entry -k, normalized.
  for (int k = 1; k < d; ++k) {
    double norm = std::sqrt(static_cast<double>(k) * (k + 1));
    for (int j = 0; j < k; ++j) vb.B(k - 1, j) = 1.0 / norm;
    vb.B(k - 1, k) = -static_cast<double>(k) / norm;
  }
  return vb;
}

ScaleParams::ScaleParams(double lambda_, int d_) : lambda(lambda_), d(d_) {
  if (d < 2) throw DimensionUnsupported("ScaleParams requires d >= 2");
  if (!(lambda >= 3.0)) throw ConfigError("ScaleParams requires lambda >= 3");
  const double ll = std::log(lambda);
  delta0 = std::exp(-std::pow(ll, 1.0 / d));
  beta = 4.0 * d * d + d - 1.0;
  alpha = std::pow(6.0 * d, d) * beta;
  s = 1.0 / (lambda * std::pow(ll, beta));
  T = alpha * std::log(ll) / lambda;
  Tstar = d * std::pow(6.0, d) * T;
}

double ConeFunction::operator()(const Vec& v) const {
  Vec l = basis.embed(v);
  double m = l.maxCoeff();
  double sum = 0.0;
  for (int i = 0; i < d; ++i) sum += std::exp(l(i) - m);
  return m + std::log(sum) - std::log(static_cast<double>(d));
}

namespace {

// max_i |l_i(v)| over unit v, extremized by random search plus local moves.
double linf_extremum(const VBasis& vb, bool maximize) {
  const int dv = vb.d - 1;
  auto value = [&](const Vec& v) { return vb.embed(v).cwiseAbs().maxCoeff(); };
  std::mt19937_64 rng(0xC0FEBABEULL + vb.d);
  std::normal_distribution<double> g(0.0, 1.0);
  Vec best_v = Vec::Unit(dv, 0);
  double best = value(best_v);
  const int n_dirs = 1000000 / std::max(1, dv);
  for (int it = 0; it < n_dirs; ++it) {
    Vec v(dv);
    for (int i = 0; i < dv; ++i) v(i) = g(rng);
    v.normalize();
    double val = value(v);
    if (maximize ? val > best : val < best) {
      best = val;
      best_v = v;
    }
  }
  // Coordinate-wise local refinement with shrinking steps.
  double step = 0.05;
  while (step > 1e-13) {
    bool improved = false;
    for (int i = 0; i < dv; ++i) {
      for (double sgn : {1.0, -1.0}) {
        Vec v = best_v + sgn * step * Vec::Unit(dv, i);
        v.normalize();
        double val = value(v);
        if (maximize ? val > best : val < best) {
          best = val;
          best_v = v;
          improved = true;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return best;
}

}  // namespace

ConeFunction make_cone_function(int d) {
  ConeFunction cf;
  cf.d = d;
  cf.basis = v_basis(d);
  double c1p = linf_extremum(cf.basis, /*maximize=*/false);
  double c2p = linf_extremum(cf.basis, /*maximize=*/true);
  cf.c1 = c1p / (d - 1);
  cf.c2 = c2p;
  return cf;
}

RescaledPoint forward(const Vec& z, double lambda, const VBasis& basis) {
  const int d = basis.d;
  if (z.size() != d) throw DegenerateInput("forward: dimension mismatch");
  for (int i = 0; i < d; ++i)
    if (!(z(i) > 0.0)) throw NonPositiveCoordinate("forward requires z in (0,inf)^d");
  Vec lz = z.array().log().matrix();
  RescaledPoint w;
  w.v = basis.project(lz);
  w.h = (std::log(lambda) + lz.sum()) / d;
  return w;
}

Vec inverse(const RescaledPoint& w, double lambda, const VBasis& basis) {
  const int d = basis.d;
  Vec l = basis.embed(w.v);
  Vec z(d);
  const double base = w.h - std::log(lambda) / d;
  for (int i = 0; i < d; ++i) z(i) = std::exp(base + l(i));
  return z;
}

bool window_contains(const RescaledPoint& w, double lambda, const VBasis& basis) {
  if (!(lambda >= 3.0)) throw ConfigError("window_contains requires lambda >= 3");
  const int d = basis.d;
  const double ll = std::log(lambda);
  const double roof = ll / d - std::pow(ll, 1.0 / d);  // log(lambda^{1/d} delta0)
  Vec l = basis.embed(w.v);
  for (int i = 0; i < d; ++i)
    if (w.h > -l(i) + roof) return false;
  return true;
}

bool petal_contains(const Vec& z0, const Vec& z) {
  const int d = static_cast<int>(z0.size());
  for (int i = 0; i < d; ++i)
    if (!(z0(i) > 0.0) || !(z(i) > 0.0))
      throw NonPositiveCoordinate("petal_contains requires positive coordinates");
  double s = 0.0;
  for (int i = 0; i < d; ++i) s += z0(i) / z(i);
  return s <= static_cast<double>(d);
}

bool halfspace_contains(const Vec& z0, const Vec& z) {
  const int d = static_cast<int>(z0.size());
  for (int i = 0; i < d; ++i)
    if (!(z0(i) > 0.0)) throw NonPositiveCoordinate("halfspace_contains requires z0 > 0");
  double s = 0.0;
  for (int i = 0; i < d; ++i) s += z(i) / z0(i);
  return s <= static_cast<double>(d);
}

double hyperboloid_level(const Vec& z) {
  for (int i = 0; i < z.size(); ++i)
    if (!(z(i) > 0.0)) throw NonPositiveCoordinate("hyperboloid_level requires z > 0");
  return z.prod();
}

bool cone_extreme_by_petals(const std::vector<Vec>& points, int index) {
  const int n = static_cast<int>(points.size());
  const int d = static_cast<int>(points[index].size());
  const double eps_y = 1e-9;
  const double tie = 1e-9;
  if (n == 1) return true;

  // Feasibility of  <z_i, y> = d,  <z_q, y> >= d  (q != i),  y >= eps_y,
  // via y = eps_y + x with x >= 0 and the equality split into two rows.
  const Vec& zi = points[index];
  Mat A(n + 1, d);
  Vec b(n + 1);
  int r = 0;
  A.row(r) = zi.transpose();
  b(r) = d - eps_y * zi.sum();
  ++r;
  A.row(r) = -zi.transpose();
  b(r) = -(d - eps_y * zi.sum());
  ++r;
  for (int q = 0; q < n; ++q) {
    if (q == index) continue;
    A.row(r) = -points[q].transpose();
    b(r) = -(d - eps_y * points[q].sum());
    ++r;
  }
  Vec c = Vec::Zero(d);
  LPResult lp = solve_lp(A, b, c);
  if (lp.status == LPStatus::Infeasible) return false;
  if (lp.status != LPStatus::Optimal) throw LPNumericalFailure("petal LP did not converge");

  // Verify the witness against the original conditions.
  Vec y = lp.x.array() + eps_y;
  double scale = 0.0;
  for (const auto& p : points) scale = std::max(scale, p.cwiseAbs().maxCoeff());
  const double tol = tie * std::max(1.0, scale) * std::max(1.0, y.cwiseAbs().maxCoeff());
  if (std::abs(zi.dot(y) - d) > 1e6 * tol)
    throw LPNumericalFailure("petal LP witness violates the tangency equation");
  for (int q = 0; q < n; ++q) {
    if (q == index) continue;
    if (points[q].dot(y) < d - 1e6 * tol)
      throw LPNumericalFailure("petal LP witness violates a coverage inequality");
  }
  return true;
}

bool grain_contains(GrainKind kind, const RescaledPoint& apex, const RescaledPoint& w,
                    const ConeFunction& cf) {
  if (kind == GrainKind::Down) return w.h - apex.h <= -cf(w.v - apex.v);
  return w.h - apex.h >= cf(apex.v - w.v);
}

}  // namespace polyscale::rescale
