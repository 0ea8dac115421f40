#include "polyscale/geometry.hpp"
#include "polyscale/linprog.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>

namespace polyscale::geometry {

namespace {

constexpr double kOrientTol = 1e-12;

double coordinate_scale(const std::vector<Vec>& pts) {
  double s = 1.0;
  for (const auto& p : pts) s = std::max(s, p.cwiseAbs().maxCoeff());
  return s;
}

VertexChart make_chart(const Vec& vertex, const std::vector<Vec>& edge_dirs) {
  const int d = static_cast<int>(vertex.size());
  Mat M(d, d);
  for (int j = 0; j < d; ++j) M.col(j) = edge_dirs[j].normalized();
  double det = std::abs(M.determinant());
  if (det < 1e-12) throw DegenerateInput("vertex chart: edge directions not independent");
  // Uniform column scale making |det| = 1 (volume preserving).
  M *= std::pow(det, -1.0 / d);
  VertexChart c;
  c.vertex = vertex;
  c.A = M.inverse();
  c.A_inv = M;
  return c;
}

}  // namespace

bool SimplePolytope::contains(const Vec& x, double tol) const {
  for (const auto& f : facets)
    if (f.normal.dot(x) > f.offset + tol) return false;
  return true;
}

SimplePolytope SimplePolytope::cube(int d, double side) {
  SimplePolytope K;
  K.d = d;
  K.is_box = true;
  K.volume = std::pow(side, d);
  K.box_lo = Vec::Zero(d);
  K.box_hi = Vec::Constant(d, side);
  for (int i = 0; i < d; ++i) {
    Facet lo, hi;
    lo.normal = -Vec::Unit(d, i);
    lo.offset = 0.0;
    hi.normal = Vec::Unit(d, i);
    hi.offset = side;
    K.facets.push_back(lo);
    K.facets.push_back(hi);
  }
  for (int mask = 0; mask < (1 << d); ++mask) {
    Vec v(d);
    std::vector<Vec> dirs(d);
    for (int i = 0; i < d; ++i) {
      v(i) = (mask >> i & 1) ? side : 0.0;
      dirs[i] = ((mask >> i & 1) ? -1.0 : 1.0) * Vec::Unit(d, i);
    }
    K.vertices.push_back(v);
    K.vertex_charts.push_back(make_chart(v, dirs));
  }
  return K;
}

SimplePolytope SimplePolytope::triangle(double a) {
  SimplePolytope K;
  K.d = 2;
  K.is_simplex = true;
  K.volume = a * a / 2.0;
  Vec v0 = Vec::Zero(2), v1(2), v2(2);
  v1 << a, 0;
  v2 << 0, a;
  K.vertices = {v0, v1, v2};
  K.box_lo = Vec::Zero(2);
  K.box_hi = Vec::Constant(2, a);
  Facet f1, f2, f3;
  f1.normal = -Vec::Unit(2, 0);
  f1.offset = 0.0;
  f2.normal = -Vec::Unit(2, 1);
  f2.offset = 0.0;
  f3.normal = Vec::Constant(2, 1.0 / std::sqrt(2.0));
  f3.offset = a / std::sqrt(2.0);
  K.facets = {f1, f2, f3};
  K.vertex_charts.push_back(make_chart(v0, {v1 - v0, v2 - v0}));
  K.vertex_charts.push_back(make_chart(v1, {v0 - v1, v2 - v1}));
  K.vertex_charts.push_back(make_chart(v2, {v0 - v2, v1 - v2}));
  return K;
}

bool FaceCounts::euler_ok() const {
  const int d = static_cast<int>(f.size());
  long alt = 0;
  for (int k = 0; k < d; ++k) alt += (k % 2 == 0 ? 1L : -1L) * f(k);
  long expect = 1L + ((d - 1) % 2 == 0 ? 1L : -1L);
  return alt == expect;
}

namespace {

// ---------------------------------------------------------------- d = 2

HullComplex hull_2d(const std::vector<Vec>& pts) {
  const int n = static_cast<int>(pts.size());
  const double scale = coordinate_scale(pts);
  const double tol = kOrientTol * scale * scale;

  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    if (pts[a](0) != pts[b](0)) return pts[a](0) < pts[b](0);
    return pts[a](1) < pts[b](1);
  });

  auto cross = [&](int o, int a, int b) {
    return (pts[a](0) - pts[o](0)) * (pts[b](1) - pts[o](1)) -
           (pts[a](1) - pts[o](1)) * (pts[b](0) - pts[o](0));
  };

  std::vector<int> hull(2 * n);
  int k = 0;
  for (int ii = 0; ii < n; ++ii) {  // lower chain
    int i = idx[ii];
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], i) <= tol) --k;
    hull[k++] = i;
  }
  int lower = k + 1;
  for (int ii = n - 2; ii >= 0; --ii) {  // upper chain
    int i = idx[ii];
    while (k >= lower && cross(hull[k - 2], hull[k - 1], i) <= tol) --k;
    hull[k++] = i;
  }
  hull.resize(k - 1);
  if (static_cast<int>(hull.size()) < 3)
    throw DegenerateInput("2d hull: input affinely degenerate");

  HullComplex h;
  h.d = 2;
  h.n_input = n;
  h.faces_by_dim.resize(2);
  const int m = static_cast<int>(hull.size());
  for (int i = 0; i < m; ++i) {
    h.faces_by_dim[0].push_back({hull[i]});
    int j = (i + 1) % m;
    std::vector<int> e = {hull[i], hull[j]};
    std::sort(e.begin(), e.end());
    h.faces_by_dim[1].push_back(e);
    Vec dir = pts[hull[j]] - pts[hull[i]];
    Vec nrm(2);
    nrm << dir(1), -dir(0);  // CCW chain: right-hand normal points outward
    nrm.normalize();
    h.facet_normals.push_back(nrm);
    h.facet_offsets.push_back(nrm.dot(pts[hull[i]]));
  }
  h.vertex_ids = hull;
  std::sort(h.vertex_ids.begin(), h.vertex_ids.end());
  for (auto& f : h.faces_by_dim[0]) (void)f;
  std::sort(h.faces_by_dim[0].begin(), h.faces_by_dim[0].end());
  return h;
}

// ---------------------------------------------------------------- d = 3

struct Tri {
  int a, b, c;
  Vec n;
  double off;
  bool alive = true;
};

HullComplex hull_3d(const std::vector<Vec>& pts) {
  const int n = static_cast<int>(pts.size());
  const double scale = coordinate_scale(pts);
  const double tol = 1e-10 * scale;

  // Initial affinely independent quadruple.
  int i0 = 0, i1 = -1, i2 = -1, i3 = -1;
  for (int i = 1; i < n; ++i)
    if ((pts[i] - pts[i0]).norm() > tol) { i1 = i; break; }
  if (i1 < 0) throw DegenerateInput("3d hull: all points coincide");
  Vec u = pts[i1] - pts[i0];
  auto cross = [](const Vec& x, const Vec& y) {
    Vec r(3);
    r << x(1) * y(2) - x(2) * y(1), x(2) * y(0) - x(0) * y(2), x(0) * y(1) - x(1) * y(0);
    return r;
  };
  double best = tol;
  for (int i = 0; i < n; ++i) {
    double a = cross(u, pts[i] - pts[i0]).norm();
    if (a > best) { best = a; i2 = i; }
  }
  if (i2 < 0) throw DegenerateInput("3d hull: input collinear");
  Vec nrm0 = cross(u, pts[i2] - pts[i0]);
  best = tol * nrm0.norm();
  for (int i = 0; i < n; ++i) {
    double vol = std::abs(nrm0.dot(pts[i] - pts[i0]));
    if (vol > best) { best = vol; i3 = i; }
  }
  if (i3 < 0) throw DegenerateInput("3d hull: input coplanar");

  Vec inner = (pts[i0] + pts[i1] + pts[i2] + pts[i3]) / 4.0;
  std::vector<Tri> tris;
  auto add_tri = [&](int a, int b, int c) {
    Tri t{a, b, c, Vec(), 0.0, true};
    t.n = cross(pts[b] - pts[a], pts[c] - pts[a]);
    double nn = t.n.norm();
    if (nn < tol) throw DegenerateInput("3d hull: degenerate facet");
    t.n /= nn;
    t.off = t.n.dot(pts[a]);
    if (t.n.dot(inner) > t.off) {  // flip outward
      std::swap(t.b, t.c);
      t.n = -t.n;
      t.off = -t.off;
    }
    tris.push_back(t);
  };
  add_tri(i0, i1, i2);
  add_tri(i0, i1, i3);
  add_tri(i0, i2, i3);
  add_tri(i1, i2, i3);

  for (int p = 0; p < n; ++p) {
    if (p == i0 || p == i1 || p == i2 || p == i3) continue;
    std::vector<int> visible;
    for (int t = 0; t < static_cast<int>(tris.size()); ++t)
      if (tris[t].alive && tris[t].n.dot(pts[p]) > tris[t].off + tol) visible.push_back(t);
    if (visible.empty()) continue;
    // Horizon = edges of visible triangles appearing exactly once.
    std::map<std::pair<int, int>, int> edge_count;
    auto bump = [&](int a, int b) { edge_count[{std::min(a, b), std::max(a, b)}]++; };
    for (int t : visible) {
      bump(tris[t].a, tris[t].b);
      bump(tris[t].b, tris[t].c);
      bump(tris[t].a, tris[t].c);
      tris[t].alive = false;
    }
    for (const auto& [e, cnt] : edge_count)
      if (cnt == 1) add_tri(e.first, e.second, p);
  }

  HullComplex h;
  h.d = 3;
  h.n_input = n;
  h.faces_by_dim.resize(3);
  std::set<std::vector<int>> edges;
  std::set<int> verts;
  for (const auto& t : tris) {
    if (!t.alive) continue;
    std::vector<int> f = {t.a, t.b, t.c};
    std::sort(f.begin(), f.end());
    h.faces_by_dim[2].push_back(f);
    h.facet_normals.push_back(t.n);
    h.facet_offsets.push_back(t.off);
    edges.insert({f[0], f[1]});
    edges.insert({f[0], f[2]});
    edges.insert({f[1], f[2]});
    verts.insert(f.begin(), f.end());
  }
  // Consistency: every input point inside all facets.
  for (int t = 0; t < static_cast<int>(h.facet_normals.size()); ++t)
    for (int p = 0; p < n; ++p)
      if (h.facet_normals[t].dot(pts[p]) > h.facet_offsets[t] + 1e3 * tol)
        throw DegenerateInput("3d hull: facet consistency check failed");
  for (const auto& e : edges) h.faces_by_dim[1].push_back(e);
  for (int v : verts) {
    h.faces_by_dim[0].push_back({v});
    h.vertex_ids.push_back(v);
  }
  return h;
}

// ------------------------------------------------------- 4 <= d <= 6

void subsets_rec(int n, int k, int start, std::vector<int>& cur,
                 const std::function<void(const std::vector<int>&)>& fn) {
  if (static_cast<int>(cur.size()) == k) {
    fn(cur);
    return;
  }
  for (int i = start; i <= n - (k - static_cast<int>(cur.size())); ++i) {
    cur.push_back(i);
    subsets_rec(n, k, i + 1, cur, fn);
    cur.pop_back();
  }
}

HullComplex hull_brute(const std::vector<Vec>& pts, int d) {
  const int n = static_cast<int>(pts.size());
  const double scale = coordinate_scale(pts);
  const double tol = 1e-9 * scale;

  HullComplex h;
  h.d = d;
  h.n_input = n;
  h.faces_by_dim.resize(d);

  std::set<std::vector<int>> facet_set;
  std::vector<int> cur;
  subsets_rec(n, d, 0, cur, [&](const std::vector<int>& s) {
    Mat D(d - 1, d);
    for (int j = 1; j < d; ++j) D.row(j - 1) = (pts[s[j]] - pts[s[0]]).transpose();
    Eigen::JacobiSVD<Mat> svd(D, Eigen::ComputeFullV);
    if (svd.singularValues()(d - 2) < tol) return;  // subset not affinely independent
    Vec nrm = svd.matrixV().col(d - 1);
    double off = nrm.dot(pts[s[0]]);
    int above = 0, below = 0, on = 0;
    for (int p = 0; p < n; ++p) {
      if (std::find(s.begin(), s.end(), p) != s.end()) continue;
      double v = nrm.dot(pts[p]) - off;
      if (v > tol) ++above;
      else if (v < -tol) ++below;
      else ++on;
      if (above && below) return;  // not supporting
    }
    if (on > 0) throw DegenerateInput("brute hull: more than d points on a facet plane");
    std::vector<int> key = s;
    if (facet_set.insert(key).second) {
      if (above) nrm = -nrm, off = -off;
      h.faces_by_dim[d - 1].push_back(key);
      h.facet_normals.push_back(nrm);
      h.facet_offsets.push_back(nrm.dot(pts[s[0]]));
    }
  });
  if (h.faces_by_dim[d - 1].empty()) throw DegenerateInput("brute hull: no facets found");

  // Sub-faces of a simplicial polytope: all proper subsets of facets.
  for (int k = 0; k < d - 1; ++k) {
    std::set<std::vector<int>> faces;
    for (const auto& f : h.faces_by_dim[d - 1]) {
      std::vector<int> c;
      subsets_rec(static_cast<int>(f.size()), k + 1, 0, c, [&](const std::vector<int>& pick) {
        std::vector<int> sub;
        for (int i : pick) sub.push_back(f[i]);
        faces.insert(sub);
      });
    }
    for (const auto& f : faces) h.faces_by_dim[k].push_back(f);
  }
  for (const auto& v : h.faces_by_dim[0]) h.vertex_ids.push_back(v[0]);
  std::sort(h.vertex_ids.begin(), h.vertex_ids.end());
  return h;
}

HullComplex hull_dispatch(const std::vector<Vec>& pts, int d) {
  if (d == 2) return hull_2d(pts);
  if (d == 3) return hull_3d(pts);
  return hull_brute(pts, d);
}

}  // namespace

HullComplex convex_hull(const std::vector<Vec>& points, int d, std::uint64_t seed) {
  if (d < 2 || d > 6) throw DimensionUnsupported("convex_hull supports 2 <= d <= 6");
  if (static_cast<int>(points.size()) < d + 1)
    throw DegenerateInput("convex_hull: need at least d+1 points");
  for (const auto& p : points) {
    if (p.size() != d) throw DegenerateInput("convex_hull: point dimension mismatch");
    if (!p.allFinite()) throw DegenerateInput("convex_hull: non-finite coordinate");
  }
  try {
    return hull_dispatch(points, d);
  } catch (const DegenerateInput&) {
    // One deterministic perturbation retry keyed to the run seed.
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double mag = 1e-9 * coordinate_scale(points);
    std::vector<Vec> perturbed = points;
    for (auto& p : perturbed)
      for (int i = 0; i < d; ++i) p(i) += mag * u(rng);
    return hull_dispatch(perturbed, d);
  }
}

FaceCounts face_counts(const HullComplex& h) {
  FaceCounts fc;
  fc.f = Eigen::VectorXi(h.d);
  for (int k = 0; k < h.d; ++k) fc.f(k) = static_cast<int>(h.faces_by_dim[k].size());
  return fc;
}

double hull_volume(const HullComplex& h, const std::vector<Vec>& points) {
  const int d = h.d;
  Vec centroid = Vec::Zero(d);
  for (int v : h.vertex_ids) centroid += points[v];
  centroid /= static_cast<double>(h.vertex_ids.size());
  double fact = 1.0;
  for (int i = 2; i <= d; ++i) fact *= i;
  double vol = 0.0;
  Mat M(d, d);
  for (const auto& f : h.facets()) {
    for (int j = 0; j < d; ++j) M.col(j) = points[f[j]] - centroid;
    vol += std::abs(M.determinant()) / fact;
  }
  return vol;
}

ConeExtremeResult cone_extreme_faces(const HullComplex& h, const std::vector<Vec>& points) {
  (void)points;
  const int d = h.d;
  const double tol = 1e-10;
  ConeExtremeResult res;
  res.point_flags.assign(h.n_input, 0);

  const auto& facets = h.facets();
  const int nf = static_cast<int>(facets.size());
  std::vector<char> facet_neg(nf, 0);
  for (int t = 0; t < nf; ++t)
    facet_neg[t] = (h.facet_normals[t].maxCoeff() < tol) ? 1 : 0;

  // vertex -> containing facets
  std::map<int, std::vector<int>> at_vertex;
  for (int t = 0; t < nf; ++t)
    for (int v : facets[t]) at_vertex[v].push_back(t);

  auto facets_containing = [&](const std::vector<int>& face) {
    std::vector<int> out;
    for (int t : at_vertex[face[0]]) {
      if (std::includes(facets[t].begin(), facets[t].end(), face.begin(), face.end()))
        out.push_back(t);
    }
    return out;
  };

  // relint(cone of generators) meets the open negative orthant:
  // max s  s.t.  sum_j alpha_j n_j + s 1 <= 0,  alpha_j >= 1,  s <= 1.
  auto relint_meets_c0 = [&](const std::vector<int>& gens) {
    const int g = static_cast<int>(gens.size());
    Mat N(d, g);
    for (int j = 0; j < g; ++j) N.col(j) = h.facet_normals[gens[j]];
    // Variables: x = alpha - 1 (g of them), t = s + 1.
    Mat A(d + 1, g + 1);
    Vec b(d + 1), c(g + 1);
    A.setZero();
    A.block(0, 0, d, g) = N;
    A.block(0, g, d, 1).setOnes();
    b.head(d) = Vec::Ones(d) - N * Vec::Ones(g);
    A.row(d).setZero();
    A(d, g) = 1.0;
    b(d) = 2.0;  // s <= 1
    c.setZero();
    c(g) = 1.0;
    LPResult lp = solve_lp(A, b, c);
    return lp.status == LPStatus::Optimal && lp.value > 1.0 - tol;
  };

  // Point criterion: the vertex's normal cone meets C_0, i.e. some
  // nonnegative combination of its facet normals is strictly negative.
  // Scale-free normalization: exists alpha >= 0 with N alpha <= -1.
  auto vertex_extreme = [&](int v) {
    const auto& fs = at_vertex[v];
    for (int t : fs)
      if (facet_neg[t]) return true;
    const int g = static_cast<int>(fs.size());
    Mat A(d, g);
    for (int j = 0; j < g; ++j) A.col(j) = -h.facet_normals[fs[j]];
    // -N alpha >= 1  <=>  N alpha <= -1; in <= form: (N) alpha <= -1.
    Mat A2 = -A;  // = N
    Vec b = Vec::Constant(d, -1.0 + tol);
    Vec c = Vec::Zero(g);
    LPResult lp = solve_lp(A2, b, c);
    return lp.status == LPStatus::Optimal;
  };

  for (int k = 0; k < d; ++k) {
    for (int fi = 0; fi < static_cast<int>(h.faces_by_dim[k].size()); ++fi) {
      const auto& face = h.faces_by_dim[k][fi];
      bool ok;
      if (k == d - 1) {
        ok = facet_neg[fi] != 0;
      } else {
        ok = relint_meets_c0(facets_containing(face));
      }
      if (ok) res.faces.emplace_back(k, fi);
    }
  }
  for (int v : h.vertex_ids)
    if (vertex_extreme(v)) res.point_flags[v] = 1;
  return res;
}

}  // namespace polyscale::geometry
