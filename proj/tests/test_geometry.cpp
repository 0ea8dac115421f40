#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "polyscale/geometry.hpp"
#include "polyscale/linprog.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace polyscale;
using namespace polyscale::geometry;

namespace {

Vec v2(double x, double y) {
  Vec v(2);
  v << x, y;
  return v;
}

// Oracle: in 2d, a point is a hull vertex iff it is not contained in the
// triangle of any three other input points (Caratheodory). O(n^3) exact test.
bool oracle_is_vertex_2d(const std::vector<Vec>& pts, int i) {
  const int n = static_cast<int>(pts.size());
  auto orient = [&](const Vec& a, const Vec& b, const Vec& c) {
    return (b(0) - a(0)) * (c(1) - a(1)) - (b(1) - a(1)) * (c(0) - a(0));
  };
  for (int a = 0; a < n; ++a) {
    if (a == i) continue;
    for (int b = a + 1; b < n; ++b) {
      if (b == i) continue;
      for (int c = b + 1; c < n; ++c) {
        if (c == i) continue;
        double d1 = orient(pts[a], pts[b], pts[i]);
        double d2 = orient(pts[b], pts[c], pts[i]);
        double d3 = orient(pts[c], pts[a], pts[i]);
        bool has_neg = d1 < 0 || d2 < 0 || d3 < 0;
        bool has_pos = d1 > 0 || d2 > 0 || d3 > 0;
        if (!(has_neg && has_pos)) return false;
      }
    }
  }
  return true;
}

// Oracle: polygon area by sorting hull vertices around their centroid and
// applying the shoelace formula. Independent of the facet machinery.
double oracle_area_2d(const std::vector<Vec>& pts, const std::vector<int>& hull_vertices) {
  Vec c = Vec::Zero(2);
  for (int i : hull_vertices) c += pts[i];
  c /= static_cast<double>(hull_vertices.size());
  std::vector<int> ord = hull_vertices;
  std::sort(ord.begin(), ord.end(), [&](int a, int b) {
    return std::atan2(pts[a](1) - c(1), pts[a](0) - c(0)) <
           std::atan2(pts[b](1) - c(1), pts[b](0) - c(0));
  });
  double area = 0.0;
  const int m = static_cast<int>(ord.size());
  for (int i = 0; i < m; ++i) {
    const Vec& p = pts[ord[i]];
    const Vec& q = pts[ord[(i + 1) % m]];
    area += p(0) * q(1) - q(0) * p(1);
  }
  return std::abs(area) / 2.0;
}

}  // namespace

TEST_CASE("simplex LP solver on known problems") {
  SUBCASE("bounded optimum") {
    Mat A(2, 2);
    A << 1, 0, 0, 1;
    Vec b(2), c(2);
    b << 1, 2;
    c << 1, 1;
    auto r = solve_lp(A, b, c);
    REQUIRE(r.status == LPStatus::Optimal);
    CHECK(r.value == doctest::Approx(3.0).epsilon(1e-9));
  }
  SUBCASE("infeasible") {
    Mat A(1, 1);
    A << 1;
    Vec b(1), c(1);
    b << -1;  // x <= -1 with x >= 0
    c << 0;
    auto r = solve_lp(A, b, c);
    CHECK(r.status == LPStatus::Infeasible);
  }
  SUBCASE("unbounded") {
    Mat A(1, 1);
    A << -1;
    Vec b(1), c(1);
    b << 1;
    c << 1;
    auto r = solve_lp(A, b, c);
    CHECK(r.status == LPStatus::Unbounded);
  }
  SUBCASE("mixed constraints requiring phase one") {
    // max 2x + 3y  s.t.  x + y <= 4,  x + 3y <= 6  ->  (3, 1), value 9.
    Mat A(2, 2);
    A << 1, 1, 1, 3;
    Vec b(2), c(2);
    b << 4, 6;
    c << 2, 3;
    auto r = solve_lp(A, b, c);
    REQUIRE(r.status == LPStatus::Optimal);
    CHECK(r.value == doctest::Approx(9.0).epsilon(1e-9));
    CHECK(r.x(0) == doctest::Approx(3.0).epsilon(1e-8));
    CHECK(r.x(1) == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("unit cube polytope: facets, charts, containment") {
  for (int d = 2; d <= 4; ++d) {
    auto K = SimplePolytope::cube(d);
    CHECK(K.volume == doctest::Approx(1.0));
    CHECK(static_cast<int>(K.facets.size()) == 2 * d);
    CHECK(static_cast<int>(K.vertices.size()) == (1 << d));
    CHECK(K.contains(Vec::Constant(d, 0.5)));
    CHECK(!K.contains(Vec::Constant(d, 1.5)));
    CHECK(K.contains(Vec::Zero(d)));
    for (const auto& ch : K.vertex_charts) {
      CHECK(std::abs(std::abs(ch.A.determinant()) - 1.0) < 1e-12);
      // Chart sends its vertex to the origin and the body into the
      // nonnegative orthant locally.
      CHECK(ch.to_chart(ch.vertex).norm() < 1e-12);
      CHECK(ch.to_chart(Vec::Constant(d, 0.5)).minCoeff() > 0.0);
      // Round trip.
      Vec x = Vec::Constant(d, 0.25);
      CHECK((ch.from_chart(ch.to_chart(x)) - x).norm() < 1e-12);
    }
  }
}

TEST_CASE("right triangle polytope") {
  double a = std::sqrt(2.0);
  auto K = SimplePolytope::triangle(a);
  CHECK(K.volume == doctest::Approx(1.0));
  CHECK(K.contains(v2(0.3, 0.3)));
  CHECK(!K.contains(v2(1.0, 1.0)));
  for (const auto& ch : K.vertex_charts) {
    CHECK(std::abs(std::abs(ch.A.determinant()) - 1.0) < 1e-12);
    Vec inside = v2(0.3, 0.3);
    CHECK(ch.to_chart(inside).minCoeff() > 0.0);
  }
}

TEST_CASE("2d hull of square corners plus interior points") {
  std::vector<Vec> pts = {v2(0, 0), v2(1, 0), v2(1, 1), v2(0, 1),
                          v2(0.5, 0.5), v2(0.25, 0.75)};
  auto h = convex_hull(pts, 2);
  auto fc = face_counts(h);
  CHECK(fc.f(0) == 4);
  CHECK(fc.f(1) == 4);
  CHECK(fc.euler_ok());
  CHECK(hull_volume(h, pts) == doctest::Approx(1.0).epsilon(1e-12));
  std::vector<int> expect = {0, 1, 2, 3};
  CHECK(h.vertex_ids == expect);
}

TEST_CASE("2d hull vs O(n^3) vertex oracle and shoelace area") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 5; ++rep) {
    std::vector<Vec> pts;
    for (int i = 0; i < 120; ++i) pts.push_back(v2(u(rng), u(rng)));
    auto h = convex_hull(pts, 2);
    std::vector<char> is_vertex(pts.size(), 0);
    for (int i : h.vertex_ids) is_vertex[i] = 1;
    for (int i = 0; i < static_cast<int>(pts.size()); ++i)
      CHECK(static_cast<bool>(is_vertex[i]) == oracle_is_vertex_2d(pts, i));
    CHECK(hull_volume(h, pts) ==
          doctest::Approx(oracle_area_2d(pts, h.vertex_ids)).epsilon(1e-10));
    // Every input point satisfies every facet inequality.
    for (size_t t = 0; t < h.facet_normals.size(); ++t)
      for (const auto& p : pts)
        CHECK(h.facet_normals[t].dot(p) <= h.facet_offsets[t] + 1e-10);
    CHECK(face_counts(h).euler_ok());
  }
}

TEST_CASE("3d hull of cube corners (degenerate input triggers retry)") {
  std::vector<Vec> pts;
  for (int m = 0; m < 8; ++m) {
    Vec p(3);
    p << (m & 1), (m >> 1 & 1), (m >> 2 & 1);
    pts.push_back(p);
  }
  auto h = convex_hull(pts, 3, 7);
  auto fc = face_counts(h);
  CHECK(fc.f(0) == 8);
  CHECK(fc.f(1) == 18);  // each square face split into two triangles
  CHECK(fc.f(2) == 12);
  CHECK(fc.euler_ok());
  CHECK(hull_volume(h, pts) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("3d hull of random sphere points: simplicial f-vector identities") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Vec> pts;
  for (int i = 0; i < 50; ++i) {
    Vec p(3);
    p << g(rng), g(rng), g(rng);
    p.normalize();
    pts.push_back(p);
  }
  auto h = convex_hull(pts, 3);
  auto fc = face_counts(h);
  CHECK(fc.f(0) == 50);            // every point on the sphere is a vertex
  CHECK(fc.f(2) == 2 * 50 - 4);    // simplicial 3-polytope
  CHECK(fc.f(1) == 3 * 50 - 6);
  CHECK(fc.euler_ok());
  double vol = hull_volume(h, pts);
  CHECK(vol > 3.0);
  CHECK(vol < 4.0 * M_PI / 3.0);
  for (size_t t = 0; t < h.facet_normals.size(); ++t)
    for (const auto& p : pts)
      CHECK(h.facet_normals[t].dot(p) <= h.facet_offsets[t] + 1e-9);
}

TEST_CASE("4d cross-polytope hull") {
  std::vector<Vec> pts;
  for (int i = 0; i < 4; ++i) {
    pts.push_back(Vec::Unit(4, i));
    pts.push_back(-Vec::Unit(4, i));
  }
  auto h = convex_hull(pts, 4);
  auto fc = face_counts(h);
  CHECK(fc.f(0) == 8);
  CHECK(fc.f(1) == 24);
  CHECK(fc.f(2) == 32);
  CHECK(fc.f(3) == 16);
  CHECK(fc.euler_ok());
  CHECK(hull_volume(h, pts) == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
}

TEST_CASE("5d simplex hull") {
  std::vector<Vec> pts;
  pts.push_back(Vec::Zero(5));
  for (int i = 0; i < 5; ++i) pts.push_back(Vec::Unit(5, i));
  auto h = convex_hull(pts, 5);
  auto fc = face_counts(h);
  // Simplex: f_k = C(6, k+1).
  CHECK(fc.f(0) == 6);
  CHECK(fc.f(1) == 15);
  CHECK(fc.f(2) == 20);
  CHECK(fc.f(3) == 15);
  CHECK(fc.f(4) == 6);
  CHECK(fc.euler_ok());
  CHECK(hull_volume(h, pts) == doctest::Approx(1.0 / 120.0).epsilon(1e-10));
}

TEST_CASE("hull input validation") {
  CHECK_THROWS_AS(convex_hull({v2(0, 0), v2(1, 1)}, 2), DegenerateInput);
  CHECK_THROWS_AS(convex_hull({}, 7), DimensionUnsupported);
  // Collinear points stay degenerate even after perturbation retry only if
  // exactly collinear with huge spread; a perturbed retry resolves generic
  // near-degeneracy, so only the unrecoverable case throws here.
  std::vector<Vec> line = {v2(0, 0), v2(1, 1), v2(2, 2), v2(3, 3)};
  CHECK_NOTHROW(convex_hull(line, 2));  // retry perturbs into a thin hull
}

TEST_CASE("cone-extreme classification: worked triangle with interior-cone vertex") {
  // Hull of {(1,3), (3,1), (2,2.5)}: the first two vertices admit a strictly
  // negative direction in their normal cones, the third does not.
  std::vector<Vec> pts = {v2(1, 3), v2(3, 1), v2(2, 2.5)};
  auto h = convex_hull(pts, 2);
  auto res = cone_extreme_faces(h, pts);
  CHECK(res.point_flags[0] == 1);
  CHECK(res.point_flags[1] == 1);
  CHECK(res.point_flags[2] == 0);
}

TEST_CASE("cone-extreme vertex whose adjacent facet normals straddle the negative orthant") {
  // At (1,1) neither incident edge normal is strictly negative, but their
  // cone contains (-1,-1), so the vertex is extreme. The other two vertices
  // have normal cones confined to half-planes missing the negative orthant.
  std::vector<Vec> pts = {v2(1, 1), v2(1.2, 2), v2(2, 1.2)};
  auto h = convex_hull(pts, 2);
  auto res = cone_extreme_faces(h, pts);
  CHECK(res.point_flags[0] == 1);
  CHECK(res.point_flags[1] == 0);
  CHECK(res.point_flags[2] == 0);
}

TEST_CASE("cone-extreme on axis-aligned square: boundary ties count as extreme") {
  // The bottom and left edges have axis-aligned outward normals, which sit on
  // the boundary of the negative orthant; the tie convention counts them, so
  // (2,1) and (1,2) are flagged while (2,2) is not.
  std::vector<Vec> pts = {v2(1, 1), v2(2, 1), v2(1, 2), v2(2, 2)};
  auto h = convex_hull(pts, 2);
  auto res = cone_extreme_faces(h, pts);
  CHECK(res.point_flags[0] == 1);
  CHECK(res.point_flags[1] == 1);
  CHECK(res.point_flags[2] == 1);
  CHECK(res.point_flags[3] == 0);
}

TEST_CASE("cone-extreme faces agree with per-point flags in 2d") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.5, 3.0);
  std::vector<Vec> pts;
  for (int i = 0; i < 40; ++i) pts.push_back(v2(u(rng), u(rng)));
  auto h = convex_hull(pts, 2);
  auto res = cone_extreme_faces(h, pts);
  // A vertex is flagged iff some qualifying face contains it.
  std::vector<char> on_qual(pts.size(), 0);
  for (const auto& [k, fi] : res.faces)
    for (int v : h.faces_by_dim[k][fi]) on_qual[v] = 1;
  for (int v : h.vertex_ids) CHECK(static_cast<bool>(res.point_flags[v]) == static_cast<bool>(on_qual[v]));
  // Flagged points must lie on the lower-left boundary: no other hull point
  // dominates them coordinate-wise from below.
  for (int v : h.vertex_ids) {
    if (!res.point_flags[v]) continue;
    for (int w : h.vertex_ids) {
      if (w == v) continue;
      bool dominates = pts[w](0) <= pts[v](0) && pts[w](1) <= pts[v](1);
      CHECK(!dominates);
    }
  }
}
