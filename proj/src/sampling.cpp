#include "polyscale/sampling.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace polyscale::sampling {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::mt19937_64 RunSeed::rng() const {
  std::uint64_t s = splitmix64(master);
  for (std::uint32_t label : path) s = splitmix64(s ^ (0x517cc1b727220a95ULL * (label + 1)));
  return std::mt19937_64(s);
}

PoissonSample sample_homogeneous(const geometry::SimplePolytope& K, double lambda,
                                 const RunSeed& seed) {
  if (!(lambda > 0.0)) throw ConfigError("sample_homogeneous requires lambda > 0");
  auto gen = seed.rng();
  std::poisson_distribution<long> pois(lambda * K.volume);
  const long n = pois(gen);
  const int d = K.d;

  PoissonSample out;
  out.lambda = lambda;
  out.points.reserve(n);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  if (K.is_box) {
    for (long i = 0; i < n; ++i) {
      Vec p(d);
      for (int j = 0; j < d; ++j)
        p(j) = K.box_lo(j) + u01(gen) * (K.box_hi(j) - K.box_lo(j));
      out.points.push_back(p);
    }
    return out;
  }
  if (K.is_simplex && d == 2) {
    // Right triangle with legs on the axes: reflect box samples across the
    // hypotenuse midline (exact, no rejection).
    const double a = K.box_hi(0);
    for (long i = 0; i < n; ++i) {
      double x = a * u01(gen), y = a * u01(gen);
      if (x + y > a) {
        x = a - x;
        y = a - y;
      }
      Vec p(2);
      p << x, y;
      out.points.push_back(p);
    }
    return out;
  }

  // General case: rejection from the bounding box.
  long proposals = 0, accepted = 0;
  while (accepted < n) {
    if (proposals >= 1000000 && accepted * 1000 < proposals)
      throw RejectionBudgetExceeded("rejection sampling stalled on polytope region");
    ++proposals;
    Vec p(d);
    for (int j = 0; j < d; ++j)
      p(j) = K.box_lo(j) + u01(gen) * (K.box_hi(j) - K.box_lo(j));
    if (K.contains(p)) {
      out.points.push_back(p);
      ++accepted;
    }
  }
  out.acceptance_rate = proposals > 0 ? static_cast<double>(accepted) / proposals : 1.0;
  return out;
}

double limit_window_mass(const LimitWindow& w, int d) {
  const double spatial = std::pow(2.0 * w.L, d - 1);
  return std::sqrt(static_cast<double>(d)) * spatial *
         (std::exp(d * w.h_max) - std::exp(d * w.h_min)) / d;
}

std::vector<RescaledPoint> sample_limit_process(const LimitWindow& w, int d,
                                                const RunSeed& seed) {
  if (!(w.L > 0.0) || !(w.h_min <= w.h_max))
    throw ConfigError("sample_limit_process: invalid window");
  auto gen = seed.rng();
  std::poisson_distribution<long> pois(limit_window_mass(w, d));
  const long n = pois(gen);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double elo = std::exp(d * w.h_min), ehi = std::exp(d * w.h_max);

  std::vector<RescaledPoint> pts;
  pts.reserve(n);
  for (long i = 0; i < n; ++i) {
    RescaledPoint p;
    p.v = Vec(d - 1);
    for (int j = 0; j < d - 1; ++j) p.v(j) = w.L * (2.0 * u01(gen) - 1.0);
    p.h = std::log(elo + u01(gen) * (ehi - elo)) / d;  // density prop. to e^{dh}
    pts.push_back(p);
  }
  return pts;
}

std::vector<RescaledPoint> restrict_to_Wlambda(const std::vector<RescaledPoint>& points,
                                               double lambda, const rescale::VBasis& basis) {
  if (std::isinf(lambda)) return points;
  std::vector<RescaledPoint> out;
  out.reserve(points.size());
  for (const auto& p : points)
    if (rescale::window_contains(p, lambda, basis)) out.push_back(p);
  return out;
}

void write_points_csv(const std::string& path, const std::vector<Vec>& points, int d) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open output file: " + path);
  for (int j = 0; j < d; ++j) f << (j ? "," : "") << "x" << j;
  f << "\n";
  char buf[64];
  for (const auto& p : points) {
    for (int j = 0; j < d; ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", p(j));
      f << (j ? "," : "") << buf;
    }
    f << "\n";
  }
}

void write_rescaled_csv(const std::string& path, const std::vector<RescaledPoint>& points,
                        int d) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open output file: " + path);
  for (int j = 0; j < d - 1; ++j) f << "v" << j << ",";
  f << "h\n";
  char buf[64];
  for (const auto& p : points) {
    for (int j = 0; j < d - 1; ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", p.v(j));
      f << buf << ",";
    }
    std::snprintf(buf, sizeof(buf), "%.17g", p.h);
    f << buf << "\n";
  }
}

}  // namespace polyscale::sampling
