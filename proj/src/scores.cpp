#include "polyscale/scores.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>

namespace polyscale::scores {

namespace {

constexpr double kBoxTol = 1e-12;

// Halfplane (n . p <= c) transported into chart coordinates y = A (x - v0):
// normal A^{-T} n, offset c - n . v0.
void to_chart_halfplane(const geometry::VertexChart& chart, const Vec& n, double c,
                        Vec& m, double& cc) {
  m = chart.A_inv.transpose() * n;
  cc = c - n.dot(chart.vertex);
}

// Sutherland-Hodgman clip of a convex polygon by n . p <= c.
std::vector<Vec> clip_halfplane(const std::vector<Vec>& poly, const Vec& n, double c) {
  std::vector<Vec> out;
  const int m = static_cast<int>(poly.size());
  for (int i = 0; i < m; ++i) {
    const Vec& a = poly[i];
    const Vec& b = poly[(i + 1) % m];
    double da = n.dot(a) - c, db = n.dot(b) - c;
    if (da <= 0.0) out.push_back(a);
    if ((da < 0.0 && db > 0.0) || (da > 0.0 && db < 0.0)) {
      double t = da / (da - db);
      out.push_back(a + t * (b - a));
    }
  }
  return out;
}

double polygon_area(const std::vector<Vec>& poly) {
  double s = 0.0;
  const int m = static_cast<int>(poly.size());
  for (int i = 0; i < m; ++i) {
    const Vec& a = poly[i];
    const Vec& b = poly[(i + 1) % m];
    s += a(0) * b(1) - b(0) * a(1);
  }
  return 0.5 * std::abs(s);
}

bool in_box(const Vec& y, double delta, double tol = kBoxTol) {
  for (int i = 0; i < y.size(); ++i)
    if (y(i) < -tol || y(i) > delta + tol) return false;
  return true;
}

}  // namespace

Mat xi_k_scores(const geometry::HullComplex& hull) {
  Mat xi = Mat::Zero(hull.n_input, hull.d);
  for (int k = 0; k < hull.d; ++k) {
    const double w = 1.0 / (k + 1);
    for (const auto& face : hull.faces_by_dim[k])
      for (int idx : face) xi(idx, k) += w;
  }
  return xi;
}

XiVResult xi_v_scores_vertex(const std::vector<Vec>& sample,
                             const geometry::SimplePolytope& K, int vertex,
                             double delta0, double lambda,
                             const geometry::HullComplex& hull,
                             std::uint64_t seed) {
  const int d = K.d;
  if (vertex < 0 || vertex >= static_cast<int>(K.vertices.size()) ||
      static_cast<int>(K.vertex_charts.size()) <= vertex)
    throw ChartMissing("no chart for requested vertex");
  const auto& chart = K.vertex_charts[vertex];

  const int n = static_cast<int>(sample.size());
  XiVResult res;
  res.xi_v.assign(n, 0.0);
  res.mc_se.assign(n, 0.0);

  // chart coordinates of the whole sample
  std::vector<Vec> y(n);
  for (int i = 0; i < n; ++i) y[i] = chart.to_chart(sample[i]);

  // hull facets in chart coordinates
  const auto& facets = hull.facets();
  const int nf = static_cast<int>(facets.size());
  std::vector<Vec> fn(nf);
  std::vector<double> fc(nf);
  std::vector<char> f_plus(nf, 0);  // negative-normal facet inside the box
  for (int j = 0; j < nf; ++j) {
    to_chart_halfplane(chart, hull.facet_normals[j], hull.facet_offsets[j], fn[j], fc[j]);
    bool neg = fn[j].maxCoeff() <= 1e-10;
    bool inside = true;
    for (int idx : facets[j])
      if (!in_box(y[idx], delta0, 1e-9)) inside = false;
    f_plus[j] = (neg && inside) ? 1 : 0;
  }

  // body facets in chart coordinates (clip region to the body, exact)
  std::vector<Vec> kn(K.facets.size());
  std::vector<double> kc(K.facets.size());
  for (size_t j = 0; j < K.facets.size(); ++j)
    to_chart_halfplane(chart, K.facets[j].normal, K.facets[j].offset, kn[j], kc[j]);

  std::set<int> hull_vertices(hull.vertex_ids.begin(), hull.vertex_ids.end());

  for (int i = 0; i < n; ++i) {
    if (!hull_vertices.count(i) || !in_box(y[i], delta0, 1e-9)) continue;
    std::vector<int> fp;
    for (int j = 0; j < nf; ++j)
      if (f_plus[j] && std::find(facets[j].begin(), facets[j].end(), i) != facets[j].end())
        fp.push_back(j);
    if (fp.empty()) continue;

    if (d == 2) {
      // sector spanned by the rays through the endpoints of the F+ edges
      double amin = 10.0, amax = -10.0;
      Vec rlo(2), rhi(2);
      for (int j : fp)
        for (int idx : facets[j]) {
          double ang = std::atan2(y[idx](1), y[idx](0));
          if (ang < amin) { amin = ang; rlo = y[idx]; }
          if (ang > amax) { amax = ang; rhi = y[idx]; }
        }
      std::vector<Vec> poly = {
          (Vec(2) << 0.0, 0.0).finished(), (Vec(2) << delta0, 0.0).finished(),
          (Vec(2) << delta0, delta0).finished(), (Vec(2) << 0.0, delta0).finished()};
      // keep cross(rlo, p) >= 0 and cross(rhi, p) <= 0
      poly = clip_halfplane(poly, (Vec(2) << rlo(1), -rlo(0)).finished(), 0.0);
      poly = clip_halfplane(poly, (Vec(2) << -rhi(1), rhi(0)).finished(), 0.0);
      for (size_t j = 0; j < kn.size() && !poly.empty(); ++j)
        poly = clip_halfplane(poly, kn[j], kc[j]);
      double outer = polygon_area(poly);
      std::vector<Vec> inner = poly;
      for (int j = 0; j < nf && !inner.empty(); ++j)
        inner = clip_halfplane(inner, fn[j], fc[j]);
      res.xi_v[i] = lambda / d * std::max(0.0, outer - polygon_area(inner));
    } else if (d == 3) {
      // Monte Carlo over the chart box: in cone, outside hull, inside body
      std::mt19937_64 gen(seed ^ (0x9e3779b97f4a7c15ULL * (i + 1)));
      std::uniform_real_distribution<double> u(0.0, delta0);
      const int N = 100000;
      long hits = 0;
      Vec p(3);
      for (int t = 0; t < N; ++t) {
        p << u(gen), u(gen), u(gen);
        // ray through p must pierce an F+ facet
        bool in_cone = false;
        for (int j : fp) {
          double denom = fn[j].dot(p);
          if (std::abs(denom) < 1e-300) continue;
          double r = fc[j] / denom;
          if (r <= 0.0) continue;
          Vec q = r * p;
          bool on_hull = true;
          for (int jj = 0; jj < nf && on_hull; ++jj)
            if (fn[jj].dot(q) > fc[jj] + 1e-9) on_hull = false;
          if (on_hull) { in_cone = true; break; }
        }
        if (!in_cone) continue;
        bool in_body = true;
        for (size_t jj = 0; jj < kn.size() && in_body; ++jj)
          if (kn[jj].dot(p) > kc[jj] + 1e-12) in_body = false;
        if (!in_body) continue;
        bool in_hull = true;
        for (int jj = 0; jj < nf && in_hull; ++jj)
          if (fn[jj].dot(p) > fc[jj] + 1e-12) in_hull = false;
        if (!in_hull) ++hits;
      }
      double frac = static_cast<double>(hits) / N;
      double box_vol = delta0 * delta0 * delta0;
      res.xi_v[i] = lambda / d * frac * box_vol;
      res.mc_se[i] = lambda / d * box_vol * std::sqrt(frac * (1.0 - frac) / N);
    } else {
      throw DimensionUnsupported("vertex volume scores support d in {2, 3}");
    }
  }
  return res;
}

double defect_volume(const geometry::SimplePolytope& K,
                     const geometry::HullComplex& hull,
                     const std::vector<Vec>& sample) {
  return K.volume - geometry::hull_volume(hull, sample);
}

ZDecomposition z_decomposition(const std::vector<Vec>& sample,
                               const geometry::SimplePolytope& K, double delta,
                               const std::vector<double>& per_point_score) {
  if (sample.size() != per_point_score.size())
    throw ConfigError("score vector length does not match sample");
  ZDecomposition z;
  z.Zi.assign(K.vertices.size(), 0.0);
  z.box_id.assign(sample.size(), -1);
  for (size_t i = 0; i < sample.size(); ++i) {
    z.Z += per_point_score[i];
    for (size_t vi = 0; vi < K.vertices.size(); ++vi) {
      if (in_box(K.vertex_charts[vi].to_chart(sample[i]), delta)) {
        z.box_id[i] = static_cast<int>(vi);
        z.Zi[vi] += per_point_score[i];
        break;
      }
    }
  }
  double s = 0.0;
  for (double v : z.Zi) s += v;
  z.Z0 = z.Z - s;
  return z;
}

bool local_faces_cone_extreme(const std::vector<Vec>& sample,
                              const geometry::SimplePolytope& K, int vertex,
                              double delta0, const geometry::HullComplex& hull) {
  const auto& chart = K.vertex_charts.at(vertex);
  std::vector<Vec> local;
  std::vector<int> orig;
  for (size_t i = 0; i < sample.size(); ++i) {
    Vec y = chart.to_chart(sample[i]);
    if (in_box(y, delta0, 1e-9)) {
      local.push_back(y);
      orig.push_back(static_cast<int>(i));
    }
  }
  if (static_cast<int>(local.size()) <= K.d) return true;
  auto local_hull = geometry::convex_hull(local, K.d);
  auto ce = geometry::cone_extreme_faces(local_hull, local);
  std::set<std::pair<int, int>> qualify(ce.faces.begin(), ce.faces.end());
  std::set<int> global(hull.vertex_ids.begin(), hull.vertex_ids.end());
  for (int k = 0; k < K.d; ++k) {
    const auto& faces = local_hull.faces_by_dim[k];
    for (int fi = 0; fi < static_cast<int>(faces.size()); ++fi) {
      bool all_global = true;
      for (int idx : faces[fi])
        if (!global.count(orig[idx])) all_global = false;
      if (all_global && !qualify.count({k, fi})) return false;
    }
  }
  return true;
}

ScoreTable build_score_table(const std::vector<Vec>& sample,
                             const geometry::SimplePolytope& K, double lambda,
                             double delta0, std::uint64_t seed) {
  if (sample.empty()) throw EmptyInput("score table needs at least one point");
  ScoreTable t;
  t.d = K.d;
  t.points = sample;
  auto hull = geometry::convex_hull(sample, K.d, seed);
  t.xi = xi_k_scores(hull);
  t.is_hull_vertex.assign(sample.size(), 0);
  for (int id : hull.vertex_ids) t.is_hull_vertex[id] = 1;

  t.xi_v.assign(sample.size(), 0.0);
  for (size_t vi = 0; vi < K.vertices.size(); ++vi) {
    auto xv = xi_v_scores_vertex(sample, K, static_cast<int>(vi), delta0, lambda,
                                 hull, seed + vi);
    for (size_t i = 0; i < sample.size(); ++i)
      if (xv.xi_v[i] != 0.0) t.xi_v[i] = xv.xi_v[i];
  }

  std::vector<double> xi0(sample.size());
  for (size_t i = 0; i < sample.size(); ++i) xi0[i] = t.xi(static_cast<int>(i), 0);
  auto z = z_decomposition(sample, K, delta0, xi0);
  t.vertex_box_id = z.box_id;
  t.Z = z.Z;
  t.Zi = z.Zi;
  return t;
}

void write_score_table_csv(const std::string& path, const ScoreTable& t) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open output file: " + path);
  f << "point_id";
  for (int c = 0; c < t.d; ++c) f << ",x" << c;
  f << ",is_hull_vertex";
  for (int k = 0; k < t.d; ++k) f << ",xi_" << k;
  f << ",xi_V,vertex_box_id\n";
  f.precision(17);
  for (size_t i = 0; i < t.points.size(); ++i) {
    f << i;
    for (int c = 0; c < t.d; ++c) f << "," << t.points[i](c);
    f << "," << static_cast<int>(t.is_hull_vertex[i]);
    for (int k = 0; k < t.d; ++k) f << "," << t.xi(static_cast<int>(i), k);
    f << "," << t.xi_v[i] << "," << t.vertex_box_id[i] << "\n";
  }
}

}  // namespace polyscale::scores
