#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "polyscale/geometry.hpp"
#include "polyscale/rescale.hpp"

#include <cmath>
#include <random>

using namespace polyscale;
using namespace polyscale::rescale;

namespace {

Vec rand_positive(int d, std::mt19937_64& rng, double lo = 0.1, double hi = 3.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vec z(d);
  for (int i = 0; i < d; ++i) z(i) = u(rng);
  return z;
}

Vec rand_vec(int d, std::mt19937_64& rng, double s = 3.0) {
  std::normal_distribution<double> g(0.0, s);
  Vec v(d);
  for (int i = 0; i < d; ++i) v(i) = g(rng);
  return v;
}

const ConeFunction& cone2() {
  static ConeFunction cf = make_cone_function(2);
  return cf;
}
const ConeFunction& cone3() {
  static ConeFunction cf = make_cone_function(3);
  return cf;
}

}  // namespace

TEST_CASE("zero-sum basis construction") {
  auto b2 = v_basis(2);
  CHECK(b2.B(0, 0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
  CHECK(b2.B(0, 1) == doctest::Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-14));
  for (int d = 2; d <= 6; ++d) {
    auto vb = v_basis(d);
    Mat gram = vb.B * vb.B.transpose();
    CHECK((gram - Mat::Identity(d - 1, d - 1)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(vb.B.rowwise().sum().cwiseAbs().maxCoeff() < 1e-12);
    // embed then re-project is the identity on V-coordinates
    std::mt19937_64 rng(3 + d);
    for (int rep = 0; rep < 20; ++rep) {
      Vec v = rand_vec(d - 1, rng);
      CHECK((vb.project(vb.embed(v)) - v).norm() < 1e-12 * (1 + v.norm()));
    }
  }
}

TEST_CASE("scale parameter invariants") {
  for (double lambda : {10.0, 1e3, 1e6}) {
    for (int d : {2, 3}) {
      ScaleParams sp(lambda, d);
      CHECK(sp.delta0 > 0.0);
      CHECK(sp.delta0 < 1.0);
      CHECK(sp.s > 0.0);
      CHECK(sp.s < sp.T);
      CHECK(sp.T < sp.Tstar);
      CHECK(sp.beta == doctest::Approx(4.0 * d * d + d - 1.0));
    }
  }
  CHECK_THROWS_AS(ScaleParams(2.0, 2), ConfigError);
}

TEST_CASE("cone function: closed form, sandwich, large-argument stability") {
  const auto& cf = cone2();
  Vec zero1 = Vec::Zero(1);
  CHECK(cf(zero1) == doctest::Approx(0.0).epsilon(1e-15));
  for (double t : {-5.0, -1.0, -0.3, 0.2, 1.7, 8.0}) {
    Vec v(1);
    v << t;
    CHECK(cf(v) == doctest::Approx(std::log(std::cosh(t / std::sqrt(2.0)))).epsilon(1e-12));
  }
  // d=2 sandwich constants are both 1/sqrt(2)
  CHECK(cf.c1 == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-6));
  CHECK(cf.c2 == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-6));
  // no overflow for huge arguments
  Vec big(1);
  big << 1000.0;
  CHECK(std::isfinite(cf(big)));
  CHECK(cf(big) == doctest::Approx(1000.0 / std::sqrt(2.0) - std::log(2.0)).epsilon(1e-12));

  for (const ConeFunction* pcf : {&cone2(), &cone3()}) {
    const auto& c = *pcf;
    std::mt19937_64 rng(17 + c.d);
    for (int rep = 0; rep < 10000; ++rep) {
      Vec v = rand_vec(c.d - 1, rng);
      double g = c(v);
      CHECK(g >= c.c1 * v.norm() - std::log(static_cast<double>(c.d)) - 1e-10);
      CHECK(g <= c.c2 * v.norm() + 1e-10);
    }
  }
}

TEST_CASE("cone function convexity") {
  for (const ConeFunction* pcf : {&cone2(), &cone3()}) {
    const auto& c = *pcf;
    std::mt19937_64 rng(23 + c.d);
    std::uniform_real_distribution<double> ut(0.0, 1.0);
    int bad = 0;
    for (int rep = 0; rep < 100000; ++rep) {
      Vec a = rand_vec(c.d - 1, rng), b = rand_vec(c.d - 1, rng);
      double t = ut(rng);
      double lhs = c(t * a + (1 - t) * b);
      double rhs = t * c(a) + (1 - t) * c(b);
      if (lhs > rhs + 1e-10) ++bad;
    }
    CHECK(bad == 0);
  }
}

TEST_CASE("scaling transform forward/inverse") {
  for (int d : {2, 3, 4}) {
    auto vb = v_basis(d);
    double lambda = 50.0;
    RescaledPoint w = forward(Vec::Ones(d), lambda, vb);
    CHECK(w.v.norm() < 1e-14);
    CHECK(w.h == doctest::Approx(std::log(lambda) / d).epsilon(1e-14));
    std::mt19937_64 rng(31 + d);
    for (int rep = 0; rep < 1000; ++rep) {
      Vec z = rand_positive(d, rng, 0.01, 5.0);
      Vec back = inverse(forward(z, lambda, vb), lambda, vb);
      CHECK((back - z).cwiseAbs().maxCoeff() < 1e-12 * z.cwiseAbs().maxCoeff());
      RescaledPoint wr{rand_vec(d - 1, rng), rand_vec(1, rng)(0)};
      RescaledPoint wrt = forward(inverse(wr, lambda, vb), lambda, vb);
      CHECK((wrt.v - wr.v).norm() < 1e-12 * (1 + wr.v.norm()));
      CHECK(std::abs(wrt.h - wr.h) < 1e-12 * (1 + std::abs(wr.h)));
    }
  }
  // d=2, lambda=1, z=(e, 1/e): v = sqrt(2), h = 0
  auto vb = v_basis(2);
  Vec z(2);
  z << std::exp(1.0), std::exp(-1.0);
  RescaledPoint w = forward(z, 1.0, vb);
  CHECK(w.v(0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK(w.h == doctest::Approx(0.0).epsilon(1e-14));
  Vec badz(2);
  badz << 1.0, 0.0;
  CHECK_THROWS_AS(forward(badz, 1.0, vb), NonPositiveCoordinate);
}

TEST_CASE("observation window membership") {
  for (int d : {2, 3}) {
    auto vb = v_basis(d);
    double lambda = std::exp(4.0);
    double roof = std::log(lambda) / d - std::pow(std::log(lambda), 1.0 / d);
    RescaledPoint on{Vec::Zero(d - 1), roof};
    CHECK(window_contains(on, lambda, vb));
    RescaledPoint above{Vec::Zero(d - 1), roof + 1e-9};
    CHECK(!window_contains(above, lambda, vb));
    // equivalence with inverse(w) in [0, delta0]^d
    double delta0 = std::exp(-std::pow(std::log(lambda), 1.0 / d));
    std::mt19937_64 rng(41 + d);
    for (int rep = 0; rep < 10000; ++rep) {
      RescaledPoint w{rand_vec(d - 1, rng, 1.5), rand_vec(1, rng, 1.5)(0)};
      Vec z = inverse(w, lambda, vb);
      bool in_cube = (z.array() <= delta0).all();
      CHECK(window_contains(w, lambda, vb) == in_cube);
    }
  }
}

TEST_CASE("petals, tangent halfspaces, pseudo-hyperboloids") {
  Vec z0(2), z(2);
  z0 << 1, 1;
  z << 2, 2;
  CHECK(petal_contains(z0, z0));  // boundary equality
  CHECK(petal_contains(z0, z));   // 1 <= 2
  CHECK(halfspace_contains(z0, Vec::Constant(2, 1e-300)));  // ~origin side
  CHECK(halfspace_contains(z0, z0));
  CHECK(hyperboloid_level(Vec::Ones(4)) == doctest::Approx(1.0));
  Vec half(2);
  half << 2.0, 0.5;
  CHECK(hyperboloid_level(half) == doctest::Approx(1.0));
  Vec zbad(2);
  zbad << 1.0, -1.0;
  CHECK_THROWS_AS(petal_contains(z0, zbad), NonPositiveCoordinate);

  // Duality: z in the petal of z0 iff z0 lies on the origin side of the
  // hyperplane tangent at z.
  std::mt19937_64 rng(57);
  for (int d : {2, 3}) {
    for (int rep = 0; rep < 10000; ++rep) {
      Vec a = rand_positive(d, rng), b = rand_positive(d, rng);
      CHECK(petal_contains(a, b) == halfspace_contains(b, a));
    }
  }
}

TEST_CASE("transform maps hyperboloids/halfspaces/petals to heights/grains") {
  for (int d : {2, 3}) {
    auto vb = v_basis(d);
    const auto& cf = (d == 2) ? cone2() : cone3();
    double lambda = 200.0;
    std::mt19937_64 rng(61 + d);
    std::uniform_real_distribution<double> uc(0.2, 5.0);

    // (i) the hyperboloid prod z_i = c/lambda maps onto height (1/d) log c
    for (int rep = 0; rep < 2000; ++rep) {
      double c = uc(rng);
      Vec z = rand_positive(d, rng);
      double target = c / lambda;
      z(d - 1) = target / z.head(d - 1).prod();
      RescaledPoint w = forward(z, lambda, vb);
      CHECK(w.h == doctest::Approx(std::log(c) / d).epsilon(1e-10));
    }

    // (ii) halfspace <-> down grain, (iii) petal <-> up grain
    int checked = 0;
    for (int rep = 0; rep < 10000; ++rep) {
      Vec z0 = rand_positive(d, rng), z = rand_positive(d, rng);
      double m1 = 0, m2 = 0;
      for (int i = 0; i < d; ++i) {
        m1 += z(i) / z0(i);
        m2 += z0(i) / z(i);
      }
      if (std::abs(m1 - d) < 1e-9 || std::abs(m2 - d) < 1e-9) continue;  // knife edge
      RescaledPoint w0 = forward(z0, lambda, vb), w = forward(z, lambda, vb);
      CHECK(halfspace_contains(z0, z) ==
            grain_contains(GrainKind::Down, w0, w, cf));
      CHECK(petal_contains(z0, z) == grain_contains(GrainKind::Up, w0, w, cf));
      ++checked;
    }
    CHECK(checked > 9900);
  }
}

TEST_CASE("grain membership basics and duality") {
  const auto& cf = cone2();
  RescaledPoint apex{Vec::Zero(1), 0.0};
  CHECK(grain_contains(GrainKind::Down, apex, apex, cf));
  CHECK(grain_contains(GrainKind::Up, apex, apex, cf));
  std::mt19937_64 rng(71);
  for (int rep = 0; rep < 10000; ++rep) {
    RescaledPoint a{rand_vec(1, rng), rand_vec(1, rng)(0)};
    RescaledPoint b{rand_vec(1, rng), rand_vec(1, rng)(0)};
    CHECK(grain_contains(GrainKind::Up, b, a, cf) ==
          grain_contains(GrainKind::Down, a, b, cf));
  }
}

TEST_CASE("petal extremality: singletons and the worked example") {
  std::vector<Vec> one = {Vec::Ones(2)};
  CHECK(cone_extreme_by_petals(one, 0));
  std::vector<Vec> pts(3, Vec(2));
  pts[0] << 1, 3;
  pts[1] << 3, 1;
  pts[2] << 2, 2.5;
  CHECK(cone_extreme_by_petals(pts, 0));
  CHECK(cone_extreme_by_petals(pts, 1));
  CHECK(!cone_extreme_by_petals(pts, 2));
}

TEST_CASE("petal LP agrees with the hull normal-cone test on seeded sets") {
  std::mt19937_64 rng(83);
  for (int set = 0; set < 200; ++set) {
    int d = (set % 2 == 0) ? 2 : 3;
    std::uniform_int_distribution<int> un(d + 2, 40);
    int n = un(rng);
    std::vector<Vec> pts;
    for (int i = 0; i < n; ++i) pts.push_back(rand_positive(d, rng, 0.2, 4.0));
    auto h = geometry::convex_hull(pts, d, 1000 + set);
    auto res = geometry::cone_extreme_faces(h, pts);
    for (int i = 0; i < n; ++i)
      CHECK(cone_extreme_by_petals(pts, i) == static_cast<bool>(res.point_flags[i]));
  }
}

TEST_CASE("transform is invariant under rotating the hyperplane basis") {
  // Any orthonormal zero-sum basis B' = R B gives the same heights, the
  // same G values (at rotated coordinates), and the same window membership.
  std::mt19937_64 gen(404);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int d : {2, 3}) {
    VBasis b = v_basis(d);
    // Random rotation of the (d-1)-dimensional coordinate space via QR.
    Mat A(d - 1, d - 1);
    for (int i = 0; i < d - 1; ++i)
      for (int j = 0; j < d - 1; ++j) A(i, j) = U(gen);
    A(0, 0) += 3.0;  // keep it comfortably full rank
    Eigen::HouseholderQR<Mat> qr(A);
    Mat R = qr.householderQ();
    VBasis rotated{d, R * b.B};
    REQUIRE((rotated.B * rotated.B.transpose() - Mat::Identity(d - 1, d - 1))
                .cwiseAbs()
                .maxCoeff() < 1e-12);

    auto cf = make_cone_function(d);
    for (int trial = 0; trial < 200; ++trial) {
      Vec z(d);
      for (int i = 0; i < d; ++i) z(i) = std::exp(2.0 * U(gen));
      double lambda = std::exp(8.0 + 4.0 * U(gen));
      RescaledPoint w = forward(z, lambda, b);
      RescaledPoint wr = forward(z, lambda, rotated);
      CHECK(wr.h == doctest::Approx(w.h).epsilon(1e-12));
      CHECK((wr.v - R * w.v).cwiseAbs().maxCoeff() < 1e-10);
      // G evaluated through the rotated embedding agrees with cf on the
      // unrotated coordinates.
      double g_rot =
          std::log((rotated.B.transpose() * wr.v).array().exp().sum() / d);
      CHECK(g_rot == doctest::Approx(cf(w.v)).epsilon(1e-10));
      CHECK(window_contains(w, lambda, b) == window_contains(wr, lambda, rotated));
      Vec back = inverse(wr, lambda, rotated);
      CHECK((back - z).cwiseAbs().maxCoeff() < 1e-9 * z.maxCoeff());
    }
  }
}
