#include "polyscale/floating.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>

namespace polyscale::floating {

namespace {

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

double relu(double x) { return x > 0.0 ? x : 0.0; }

std::vector<Vec> clip_halfplane(const std::vector<Vec>& poly, const Vec& n, double c) {
  std::vector<Vec> out;
  const int m = static_cast<int>(poly.size());
  for (int i = 0; i < m; ++i) {
    const Vec& a = poly[i];
    const Vec& b = poly[(i + 1) % m];
    double da = n.dot(a) - c, db = n.dot(b) - c;
    if (da <= 0.0) out.push_back(a);
    if ((da < 0.0 && db > 0.0) || (da > 0.0 && db < 0.0))
      out.push_back(a + da / (da - db) * (b - a));
  }
  return out;
}

double polygon_area(const std::vector<Vec>& poly) {
  double s = 0.0;
  const int m = static_cast<int>(poly.size());
  for (int i = 0; i < m; ++i)
    s += poly[i](0) * poly[(i + 1) % m](1) - poly[(i + 1) % m](0) * poly[i](1);
  return 0.5 * std::abs(s);
}

// body vertices ordered counterclockwise (d=2)
std::vector<Vec> ordered_polygon(const geometry::SimplePolytope& K) {
  Vec c = Vec::Zero(2);
  for (const auto& v : K.vertices) c += v;
  c /= static_cast<double>(K.vertices.size());
  std::vector<Vec> poly = K.vertices;
  std::sort(poly.begin(), poly.end(), [&](const Vec& a, const Vec& b) {
    return std::atan2(a(1) - c(1), a(0) - c(0)) < std::atan2(b(1) - c(1), b(0) - c(0));
  });
  return poly;
}

// Exact cap volume Vol(K cap {n . x >= n . z}).
double cap_volume(const geometry::SimplePolytope& K, const Vec& n, const Vec& z) {
  const double c = n.dot(z);
  if (K.d == 2) {
    auto poly = ordered_polygon(K);
    poly = clip_halfplane(poly, -n, -c);  // keep n . x >= c
    return polygon_area(poly);
  }
  if (K.is_box) {
    Vec L = K.box_hi - K.box_lo;
    return K.volume - box_halfspace_volume(n, c, L);
  }
  throw DimensionUnsupported("exact cap volumes need d=2 or a box body");
}

}  // namespace

double box_halfspace_volume(const Vec& n, double c, const Vec& L) {
  const int d = static_cast<int>(n.size());
  // reflect axes so every coefficient is nonnegative
  Vec m = n;
  double t = c;
  for (int i = 0; i < d; ++i)
    if (m(i) < 0.0) {
      t -= m(i) * L(i);
      m(i) = -m(i);
    }
  // drop (near-)zero coefficients: free axes multiply the volume
  std::vector<int> act;
  double free_vol = 1.0;
  double scale = m.maxCoeff();
  for (int i = 0; i < d; ++i) {
    if (m(i) > 1e-14 * scale) act.push_back(i);
    else free_vol *= L(i);
  }
  const int k = static_cast<int>(act.size());
  if (k == 0) return t >= 0.0 ? free_vol : 0.0;
  double denom = factorial(k);
  for (int i : act) denom *= m(i);
  double vol = 0.0;
  for (int mask = 0; mask < (1 << k); ++mask) {
    double arg = t;
    int bits = 0;
    for (int b = 0; b < k; ++b)
      if (mask & (1 << b)) {
        arg -= m(act[b]) * L(act[b]);
        ++bits;
      }
    vol += (bits % 2 == 0 ? 1.0 : -1.0) * std::pow(relu(arg), k);
  }
  return free_vol * vol / denom;
}

MRegion make_mregion(const Vec& z) {
  MRegion r;
  r.center = z;
  r.lo = 0.5 * z;
  r.hi = 1.5 * z;
  return r;
}

bool regions_overlap_interior(const MRegion& a, const MRegion& b) {
  for (int i = 0; i < a.lo.size(); ++i)
    if (std::max(a.lo(i), b.lo(i)) >= std::min(a.hi(i), b.hi(i)) - 1e-15) return false;
  return true;
}

bool regions_overlap_closed(const MRegion& a, const MRegion& b) {
  for (int i = 0; i < a.lo.size(); ++i)
    if (std::max(a.lo(i), b.lo(i)) > std::min(a.hi(i), b.hi(i)) + 1e-12) return false;
  return true;
}

double cap_volume_orthant(const Vec& z0) {
  const int d = static_cast<int>(z0.size());
  double v = std::pow(static_cast<double>(d), d) / factorial(d);
  for (int i = 0; i < d; ++i) {
    if (z0(i) <= 0.0) throw NonPositiveCoordinate("orthant cap needs z0 > 0");
    v *= z0(i);
  }
  return v;
}

double v_function(const Vec& z, const geometry::SimplePolytope& K,
                  bool force_general) {
  if (!K.contains(z)) throw PointOutsideBody("v(z) requires z inside the body");
  const int d = K.d;
  if (K.is_box && !force_general) {
    // corner-simplex value, used where the tangent simplex (legs d z_i)
    // fits inside the box: folded coordinates at most L/d
    Vec zf = z;
    bool near_corner = true;
    for (int i = 0; i < d; ++i) {
      double L = K.box_hi(i) - K.box_lo(i);
      zf(i) = std::min(z(i) - K.box_lo(i), K.box_hi(i) - z(i));
      if (zf(i) > L / d + 1e-12) near_corner = false;
    }
    if (near_corner) return cap_volume_orthant(zf);
  }
  // direction search with exact cap volumes
  auto cap = [&](const Vec& n) { return cap_volume(K, n, z); };
  double best = K.volume;
  if (d == 2) {
    const int N = 10000;
    Vec n(2);
    double base = std::numeric_limits<double>::infinity();
    double bang = 0.0;
    for (int i = 0; i < N; ++i) {
      double a = 2.0 * M_PI * i / N;
      n << std::cos(a), std::sin(a);
      double v = cap(n);
      if (v < base) { base = v; bang = a; }
    }
    double step = 2.0 * M_PI / N;
    double ang = bang;
    while (step > 1e-10) {
      bool moved = false;
      for (double s : {step, -step}) {
        n << std::cos(ang + s), std::sin(ang + s);
        double v = cap(n);
        if (v < base) { base = v; ang += s; moved = true; }
      }
      if (!moved) step *= 0.5;
    }
    best = base;
  } else if (d == 3) {
    const int N = 10000;
    double base = std::numeric_limits<double>::infinity();
    double bth = 0.0, bph = 0.0;
    Vec n(3);
    const double ga = M_PI * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < N; ++i) {
      double zc = 1.0 - 2.0 * (i + 0.5) / N;
      double r = std::sqrt(1.0 - zc * zc);
      double ph = ga * i;
      n << r * std::cos(ph), r * std::sin(ph), zc;
      double v = cap(n);
      if (v < base) { base = v; bth = std::acos(zc); bph = ph; }
    }
    double step = 0.02;
    while (step > 1e-9) {
      bool moved = false;
      for (int dim = 0; dim < 2; ++dim)
        for (double s : {step, -step}) {
          double th = bth + (dim == 0 ? s : 0.0);
          double ph = bph + (dim == 1 ? s : 0.0);
          n << std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th);
          double v = cap(n);
          if (v < base) { base = v; bth = th; bph = ph; moved = true; }
        }
      if (!moved) step *= 0.5;
    }
    best = base;
  } else {
    throw DimensionUnsupported("v(z) direction search supports d in {2, 3}");
  }
  return best;
}

bool annulus_contains(const Vec& z, const geometry::SimplePolytope& K,
                      const rescale::ScaleParams& params) {
  double v = v_function(z, K);
  return params.s <= v && v < params.Tstar;
}

double adjusted_delta(double delta, double T, int d) {
  double m = std::floor(std::log(T / std::pow(delta, d)) / std::log(3.0));
  return std::pow(T / std::pow(3.0, m), 1.0 / d);
}

std::vector<MRegion> dyadic_collection(double delta, const rescale::ScaleParams& params,
                                       int d) {
  const double T = params.T;
  double mx = std::log(T / std::pow(delta, d)) / std::log(3.0);
  long m = std::lround(mx);
  if (std::abs(mx - m) > 1e-9 || m < 0)
    throw NonIntegerDyadicLevel("log_3(T / delta^d) is not a nonnegative integer");
  long kmax = static_cast<long>(std::floor(std::log(1.0 / (3.0 * delta)) / std::log(3.0) + 1e-9));

  std::vector<MRegion> out;
  std::vector<int> code(d, 0);
  std::function<void(int, long)> rec = [&](int i, long rest) {
    if (i == d - 1) {
      if (rest < 0 || rest > kmax) return;
      code[i] = static_cast<int>(rest);
      Vec z(d);
      for (int j = 0; j < d; ++j) z(j) = std::pow(3.0, code[j]) * delta;
      MRegion r = make_mregion(z);
      r.code = code;
      r.delta = delta;
      out.push_back(std::move(r));
      return;
    }
    for (long k = 0; k <= std::min<long>(kmax, rest); ++k) {
      code[i] = static_cast<int>(k);
      rec(i + 1, rest - k);
    }
  };
  rec(0, m);
  return out;
}

MRegion rounded_region(const Vec& z, double delta) {
  const int d = static_cast<int>(z.size());
  long kmax = static_cast<long>(std::floor(std::log(1.0 / (3.0 * delta)) / std::log(3.0) + 1e-9));
  Vec zz(d);
  MRegion r;
  r.code.resize(d);
  for (int i = 0; i < d; ++i) {
    long k = static_cast<long>(std::floor(std::log(2.0 * z(i) / delta) / std::log(3.0)));
    k = std::max(0L, std::min(k, kmax));
    r.code[i] = static_cast<int>(k);
    zz(i) = std::pow(3.0, k) * delta;
  }
  MRegion base = make_mregion(zz);
  base.code = r.code;
  base.delta = delta;
  return base;
}

std::vector<Vec> probe_net(double T, int d, int n, double zmin, double zmax) {
  std::vector<Vec> out;
  const double top = std::min(zmax, 1.0 / 3.0);
  if (zmin >= top) return out;
  const double llo = std::log(zmin), lhi = std::log(top);
  if (d == 2) {
    const double phi = 0.6180339887498949;
    int i = 0, made = 0;
    while (made < n && i < 50 * n) {
      double u = std::fmod(0.5 + phi * i, 1.0);
      ++i;
      double z1 = std::exp(llo + u * (lhi - llo));
      double z2 = T / z1;
      if (z2 < zmin || z2 > top) continue;
      Vec z(2);
      z << z1, z2;
      out.push_back(z);
      ++made;
    }
    return out;
  }
  if (d == 3) {
    auto halton = [](int i, int b) {
      double f = 1.0, r = 0.0;
      for (int x = i + 1; x > 0; x /= b) {
        f /= b;
        r += f * (x % b);
      }
      return r;
    };
    int i = 0, made = 0;
    while (made < n && i < 200 * n) {
      double z1 = std::exp(llo + halton(i, 2) * (lhi - llo));
      double z2 = std::exp(llo + halton(i, 3) * (lhi - llo));
      ++i;
      double z3 = T / (z1 * z2);
      if (z3 < zmin || z3 > top) continue;
      Vec z(3);
      z << z1, z2, z3;
      out.push_back(z);
      ++made;
    }
    return out;
  }
  throw DimensionUnsupported("probe net supports d in {2, 3}");
}

bool maximality_check(const std::vector<MRegion>& collection, double delta,
                      const rescale::ScaleParams& params, int d, int probes) {
  // probe the band the dyadic boxes tile: every coordinate in
  // [delta, 3^m delta] on the level surface
  double m = std::lround(std::log(params.T / std::pow(delta, d)) / std::log(3.0));
  auto net = probe_net(params.T, d, probes, delta, std::pow(3.0, m) * delta);
  // a missing dyadic region is witnessed exactly at its own center, so every
  // level-m center is probed, not just the members of `collection`
  for (const auto& r : dyadic_collection(delta, params, d)) net.push_back(r.center);
  for (const auto& z : net) {
    MRegion cand = make_mregion(z);
    bool hit = false;
    for (const auto& r : collection)
      if (regions_overlap_interior(cand, r)) {
        hit = true;
        break;
      }
    if (!hit) return false;
  }
  (void)delta;
  return true;
}

double slab_width(int d) {
  if (d == 2) return 1.0;
  double c = 1.0 / (2.0 * d);  // pyramid over the box base, height >= Delta/2
  double bound = std::pow(static_cast<double>(d), d) / (2.0 * c * factorial(d));
  return std::max(d / 2.0, bound);
}

void write_mregions_csv(const std::string& path, const std::vector<MRegion>& regions) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open output file: " + path);
  if (regions.empty()) return;
  const int d = static_cast<int>(regions.front().center.size());
  f << "region_id";
  for (int i = 0; i < d; ++i) f << ",k" << i;
  for (int i = 0; i < d; ++i) f << ",center" << i;
  for (int i = 0; i < d; ++i) f << ",lo" << i;
  for (int i = 0; i < d; ++i) f << ",hi" << i;
  f << "\n";
  f.precision(17);
  for (size_t r = 0; r < regions.size(); ++r) {
    f << r;
    for (int i = 0; i < d; ++i)
      f << "," << (regions[r].code.empty() ? -1 : regions[r].code[i]);
    for (int i = 0; i < d; ++i) f << "," << regions[r].center(i);
    for (int i = 0; i < d; ++i) f << "," << regions[r].lo(i);
    for (int i = 0; i < d; ++i) f << "," << regions[r].hi(i);
    f << "\n";
  }
}

}  // namespace polyscale::floating
