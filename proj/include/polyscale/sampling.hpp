#pragma once

#include "polyscale/common.hpp"
#include "polyscale/geometry.hpp"
#include "polyscale/rescale.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace polyscale::sampling {

// Hierarchical seed: a master seed plus a derivation path of labels. Equal
// (master, path) pairs yield byte-identical streams regardless of how many
// sibling streams exist, which keeps threaded replications reproducible.
struct RunSeed {
  std::uint64_t master = 0;
  std::vector<std::uint32_t> path;

  RunSeed child(std::uint32_t label) const {
    RunSeed s = *this;
    s.path.push_back(label);
    return s;
  }
  std::mt19937_64 rng() const;
};

struct PoissonSample {
  double lambda = 0.0;
  std::vector<Vec> points;
  double acceptance_rate = 1.0;  // 1 for direct samplers
};

struct LimitWindow {
  double L = 0.0;      // spatial box [-L, L]^(d-1)
  double h_min = 0.0;
  double h_max = 0.0;
};

// Homogeneous Poisson process of intensity lambda on K. Direct for boxes and
// the right triangle; rejection from the bounding box otherwise (capped at
// 1e6 proposals per 1e3 accepted points).
PoissonSample sample_homogeneous(const geometry::SimplePolytope& K, double lambda,
                                 const RunSeed& seed);

// Poisson process with intensity sqrt(d) e^{dh} dh dv on the window.
std::vector<RescaledPoint> sample_limit_process(const LimitWindow& w, int d,
                                                const RunSeed& seed);
double limit_window_mass(const LimitWindow& w, int d);

// Keeps the points lying in W_lambda; lambda = +infinity is the identity.
std::vector<RescaledPoint> restrict_to_Wlambda(const std::vector<RescaledPoint>& points,
                                               double lambda, const rescale::VBasis& basis);

// CSV dumps, 17 significant digits.
void write_points_csv(const std::string& path, const std::vector<Vec>& points, int d);
void write_rescaled_csv(const std::string& path, const std::vector<RescaledPoint>& points,
                        int d);

}  // namespace polyscale::sampling
