#pragma once

#include "polyscale/common.hpp"
#include "polyscale/rescale.hpp"
#include "polyscale/sampling.hpp"

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace polyscale::festoon {

// ----------------------------------------------------------------- d=2 core

// Scalar cone function for d=2: G(v) with v the single V-coordinate.
double G2(double t);

// Crossing abscissa of f_p(a) = h_p + G2(v_p - a) and f_q (v_p < v_q).
// Exists iff |h_q - h_p| < (v_q - v_p)/sqrt(2); closed form.
double crossing2(double vp, double hp, double vq, double hq);

struct EnvPoint {
  double v = 0.0;
  double h = 0.0;
  int id = -1;
};

// Lower envelope E(a) = min_q [h_q + G2(v_q - a)] of a d=2 point set.
// Winners are ordered by v; breakpoints[i] separates winners[i] and
// winners[i+1]. Supports O(log n) height queries and cheap functional
// insertion (returns a patched copy).
class Envelope {
 public:
  static Envelope build(std::vector<EnvPoint> pts);

  bool empty() const { return winners_.empty(); }
  const std::vector<EnvPoint>& winners() const { return winners_; }
  const std::vector<double>& breakpoints() const { return breaks_; }

  double value(double a) const;             // E(a)
  double boundary_height(double v) const;   // sup_a [E(a) - G2(v - a)]
  // max of boundary_height over [-L, L]
  double ceiling(double L) const;

  // A candidate (v, h) lies on the festoon boundary iff h <= boundary_height(v).
  bool admits(double v, double h, double tol = 1e-9) const;

  // Patched envelope with (v, h) inserted; *inserted reports whether the
  // point entered the envelope (i.e. is extreme in the augmented set).
  Envelope insert(double v, double h, int id, bool* inserted = nullptr) const;

  int winner_position(int id) const;  // -1 if id not on the envelope

  // Scores of the winner at position pos in this envelope.
  double xi0(int pos) const { return pos >= 0 ? 1.0 : 0.0; }
  double xi1(int pos) const;
  // Exact per-span integral of e^{2 dPhi} over the adjacent face spans,
  // divided by 2 sqrt(2).
  double xi_v(int pos) const;
  // Same quantity by adaptive Simpson quadrature (relative tolerance rtol).
  double xi_v_quadrature(int pos, double rtol = 1e-8) const;

 private:
  std::vector<EnvPoint> winners_;
  std::vector<double> breaks_;
};

// ------------------------------------------------------------ festoon model

struct FestoonModel {
  int d = 2;
  std::vector<RescaledPoint> points;
  std::vector<char> extreme;
  Envelope env;                 // d = 2 only
  const rescale::ConeFunction* cf = nullptr;  // shared, for d >= 3 paths
};

FestoonModel build_festoon(const std::vector<RescaledPoint>& pts, int d);

// Exact minimum of the envelope at spatial point a with the argmin set
// (ties within 1e-9). Brute-force scan; any d.
std::pair<double, std::vector<int>> envelope_min(const Vec& a,
                                                 const std::vector<RescaledPoint>& pts,
                                                 const rescale::ConeFunction& cf);

// Extreme flags: d=2 exact envelope; d=3 grid scan (eta = 0.05) with local
// refinement per candidate.
std::vector<char> ext_points(const std::vector<RescaledPoint>& pts, int d);

struct FestoonFace {
  int k = 0;
  std::vector<int> gens;  // k+1 generating extreme-point indices
  RescaledPoint apex;     // witness apex of the tangent down-grain translate
};

std::vector<FestoonFace> festoon_faces(const FestoonModel& m);

double boundary_height(const Vec& v, const FestoonModel& m);

double xi_k_inf(int index, const FestoonModel& m, int k);
double xi_v_inf(int index, const FestoonModel& m);

// ------------------------------------------------------ limit-side statistics

struct FestoonWindow {
  double L = 12.0;      // spatial box [-L, L]
  double h_min = -8.0;
  double h_max = 6.0;
  double guard = 4.0;   // spatial guard band excluded from score collection
};

// Draws the limit process on the window, keeping only points at or below
// the running festoon boundary (points strictly above it can never become
// extreme or affect the envelope, so dropping them is exact). Sampled in
// height slabs from the bottom up; slabs entirely above the current
// ceiling are skipped.
std::vector<EnvPoint> sample_window_points(const FestoonWindow& w,
                                           const sampling::RunSeed& seed);

enum class ScoreKind { Xi0, Xi1, XiV };

struct Estimate {
  double value = 0.0;
  double se = 0.0;
};

// Monte Carlo estimate of  I = int E xi((0,h0), P) e^{2 h0} dh0  over the
// Gauss-Legendre h0 grid (41 nodes on [-6, 4]).
Estimate mean_score_integral(ScoreKind kind, const FestoonWindow& w, int reps,
                             const sampling::RunSeed& seed);

// Pair correlation  c(w1, w2) = E xi(w1, P+w1+w2) xi(w2, P+w1+w2)
//                              - E xi(w1, P+w1) E xi(w2, P+w2)
// with common random numbers; jackknife standard error.
Estimate correlation_c(ScoreKind kind, const RescaledPoint& w1, const RescaledPoint& w2,
                       int reps, const sampling::RunSeed& seed, const FestoonWindow& w);

struct Sigma2Result {
  double value = 0.0;
  double se = 0.0;
  double term1 = 0.0;  // sqrt(d) int E xi^2 e^{d h0} dh0
  double term2 = 0.0;  // d  int int int c(...) e^{d(h0+h1)}
};

// Limit variance density: second-moment term plus the integrated pair
// correlation over the (h0) x (v1,h1) product grids.
Sigma2Result sigma2(ScoreKind kind, const FestoonWindow& w, int reps,
                    const sampling::RunSeed& seed, int blocks = 10);

// (d-1)-dimensional volume of the regular simplex with vertices
// (d e_i - 1), i.e. d^{d-1} sqrt(d) / (d-1)!.
double simplex_volume_Sd(int d);
// F = d^{-d+1} Vol(S(d)) sigma2.
double limit_constant_F(int d, double sigma2_value);

// Gauss-Legendre nodes/weights on [a, b].
void gauss_legendre(int n, double a, double b, std::vector<double>& nodes,
                    std::vector<double>& weights);

// Structured dump: points, extreme flags, faces, breakpoints, and the
// boundary polyline sampled at `resolution` spacing.
void write_festoon_json(const std::string& path, const FestoonModel& m,
                        double resolution);

}  // namespace polyscale::festoon
