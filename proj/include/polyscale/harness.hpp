#pragma once

#include "polyscale/common.hpp"
#include "polyscale/festoon.hpp"
#include "polyscale/geometry.hpp"
#include "polyscale/sampling.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace polyscale::harness {

// Experiment kinds:
//   variance-scan   : per-lambda moments of the face counts and of the
//                     missed volume, plus their (log lambda)^(d-1)
//                     normalizations.
//   limit-constants : d = 2 limit-side constants (mean score integral,
//                     variance densities, scaling constants).
//   convergence     : per-lambda two-sample KS comparison of window
//                     extreme-point counts, Euclidean vs limit process,
//                     plus a same-law calibration run.
//   decomposition   : per-lambda variance split of Z into per-vertex-box
//                     contributions and the localization diagnostic rate.
//   diagnostics     : per-lambda corner-box occupancy and localization rate.
struct ExperimentConfig {
  std::string kind = "variance-scan";
  std::string body = "cube";  // cube | triangle (triangle implies d = 2)
  int d = 2;
  std::vector<double> lambdas = {4096, 8192, 16384, 32768, 65536, 131072, 262144};
  int reps = 200;        // Euclidean-side replicates per lambda
  int limit_reps = 200;  // limit-side Monte Carlo budget
  // Score kinds the limit-side constants are computed for.
  std::vector<std::string> score_kinds = {"xi0", "xiV"};
  festoon::FestoonWindow window;
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  int threads = 1;

  void validate() const;  // throws ConfigError on any bad field
};

// Flat "key = value" file; blank lines and '#' comments allowed; unknown
// keys are rejected. `apply_override` accepts the same keys.
ExperimentConfig load_config(const std::string& path);
void apply_override(ExperimentConfig& cfg, const std::string& key,
                    const std::string& value);

struct ResultRow {
  std::string experiment;
  double lambda = 0.0;  // 0 for limit-side rows
  std::string statistic;
  double estimate = 0.0;
  double se = 0.0;
  int reps = 0;
  double wall_s = 0.0;
};

std::vector<ResultRow> run_variance_scan(const ExperimentConfig& cfg);
std::vector<ResultRow> run_limit_constants(const ExperimentConfig& cfg);
std::vector<ResultRow> run_convergence(const ExperimentConfig& cfg);
std::vector<ResultRow> run_decomposition(const ExperimentConfig& cfg);
std::vector<ResultRow> run_diagnostics(const ExperimentConfig& cfg);
// Dispatches on cfg.kind and tags every row with it.
std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg);

// Least squares of y against x = (log lambda)^(d-1). Throws
// InsufficientPoints with fewer than 3 samples.
struct LogPowerFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};
LogPowerFit fit_log_power(const std::vector<std::pair<double, double>>& lambda_y,
                          int d);

// Sample mean and variance with standard errors (jackknife for the
// variance). Needs at least 3 observations.
struct MomentStats {
  double mean = 0.0;
  double mean_se = 0.0;
  double var = 0.0;
  double var_se = 0.0;
};
MomentStats moment_stats(const std::vector<double>& x);

// Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value
// (conservative under ties).
struct KSResult {
  double stat = 0.0;
  double p = 0.0;
};
KSResult ks_two_sample(std::vector<double> a, std::vector<double> b);

geometry::SimplePolytope make_body(const ExperimentConfig& cfg);

// One Euclidean-side replicate: Poisson sample on K at intensity lambda,
// hull statistics, and (optionally) the per-vertex-box score split at
// delta0(lambda) plus the localization diagnostic.
struct RepSummary {
  double n_points = 0.0;
  double f0 = 0.0;
  double f1 = 0.0;
  double f2 = 0.0;          // d = 3 only
  double lam_defect = 0.0;  // lambda * (vol K - vol hull)
  std::vector<double> Zi;   // with_boxes only: per-vertex xi0 mass
  double Z0 = 0.0;          // with_boxes only: xi0 mass outside every box
  bool cone_extreme_ok = true;
};
RepSummary simulate_rep(const geometry::SimplePolytope& K, double lambda,
                        const sampling::RunSeed& seed, bool with_boxes);

// Convex hull preceded by an 8-direction extreme-point prefilter (exact:
// points strictly inside the prefilter polygon are never hull vertices).
// d = 2 only. `kept` receives the surviving original indices.
geometry::HullComplex fast_hull2(const std::vector<Vec>& points,
                                 std::vector<int>* kept = nullptr);

// Deterministic writers; doubles at 17 significant digits.
void write_results_csv(const std::string& path, const std::vector<ResultRow>& rows);
void write_meta_file(const std::string& path, const ExperimentConfig& cfg,
                     double wall_s);

}  // namespace polyscale::harness
