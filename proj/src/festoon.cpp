#include "polyscale/festoon.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

namespace polyscale::festoon {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kTieTol = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();

double sq(double x) { return x * x; }

}  // namespace

double G2(double t) {
  double x = std::abs(t) / kSqrt2;
  // log cosh(x), stable for large |x|
  return x + std::log1p(std::exp(-2.0 * x)) - std::log(2.0);
}

double crossing2(double vp, double hp, double vq, double hq) {
  const double c = hq - hp;
  const double s = (vq - vp) / kSqrt2;
  // caller guarantees |c| < s
  const double num = std::exp(s) - std::exp(-c);
  const double den = std::exp(-c) - std::exp(-s);
  return vp + (kSqrt2 / 2.0) * std::log(num / den);
}

// ------------------------------------------------------------------ Envelope

Envelope Envelope::build(std::vector<EnvPoint> pts) {
  std::sort(pts.begin(), pts.end(), [](const EnvPoint& a, const EnvPoint& b) {
    if (a.v != b.v) return a.v < b.v;
    return a.h < b.h;
  });
  Envelope env;
  for (const auto& q : pts) {
    bool skip = false;
    while (!env.winners_.empty()) {
      const EnvPoint& p = env.winners_.back();
      const double c = q.h - p.h;
      const double s = (q.v - p.v) / kSqrt2;
      if (c >= s) {  // q never drops below the current rightmost winner
        skip = true;
        break;
      }
      if (c <= -s) {  // p lies above f_q everywhere
        env.winners_.pop_back();
        if (!env.breaks_.empty()) env.breaks_.pop_back();
        continue;
      }
      double a = crossing2(p.v, p.h, q.v, q.h);
      double pleft = env.breaks_.empty() ? -kInf : env.breaks_.back();
      if (a <= pleft) {  // p's winning interval is swallowed
        env.winners_.pop_back();
        if (!env.breaks_.empty()) env.breaks_.pop_back();
        continue;
      }
      env.breaks_.push_back(a);
      break;
    }
    if (!skip) env.winners_.push_back(q);
  }
  return env;
}

double Envelope::value(double a) const {
  if (winners_.empty()) throw EmptyInput("envelope value on empty point set");
  size_t idx = std::upper_bound(breaks_.begin(), breaks_.end(), a) - breaks_.begin();
  const EnvPoint& w = winners_[idx];
  return w.h + G2(w.v - a);
}

double Envelope::boundary_height(double v) const {
  if (winners_.empty()) throw EmptyInput("boundary height on empty point set");
  if (v <= winners_.front().v)
    return winners_.front().h + (winners_.front().v - v) / kSqrt2;
  if (v >= winners_.back().v)
    return winners_.back().h + (v - winners_.back().v) / kSqrt2;
  // first winner strictly right of v
  size_t j = std::upper_bound(winners_.begin(), winners_.end(), v,
                              [](double x, const EnvPoint& w) { return x < w.v; }) -
             winners_.begin();
  const double a = breaks_[j - 1];
  return value(a) - G2(v - a);
}

double Envelope::ceiling(double L) const {
  double best = std::max(boundary_height(-L), boundary_height(L));
  for (double a : breaks_)
    if (a >= -L && a <= L) best = std::max(best, value(a));
  return best;
}

bool Envelope::admits(double v, double h, double tol) const {
  return h <= boundary_height(v) + tol;
}

Envelope Envelope::insert(double v0, double h0, int id, bool* inserted) const {
  if (winners_.empty()) {
    Envelope env;
    env.winners_.push_back({v0, h0, id});
    if (inserted) *inserted = true;
    return env;
  }
  if (!admits(v0, h0, kTieTol)) {
    if (inserted) *inserted = false;
    return *this;
  }
  const int n = static_cast<int>(winners_.size());
  int j = static_cast<int>(std::upper_bound(winners_.begin(), winners_.end(), v0,
                                            [](double x, const EnvPoint& w) {
                                              return x < w.v;
                                            }) -
                           winners_.begin());
  // Walk left for the entry breakpoint; drop winners the new point swallows.
  int li = j - 1;
  double A_lo = -kInf;
  bool degenerate = false;
  while (li >= 0) {
    const EnvPoint& w = winners_[li];
    const double c = h0 - w.h;
    const double s = (v0 - w.v) / kSqrt2;
    if (c <= -s) { --li; continue; }       // w above f_new everywhere
    if (c >= s) { degenerate = true; break; }
    double a = crossing2(w.v, w.h, v0, h0);  // new wins on (a, inf)
    double wleft = (li == 0) ? -kInf : breaks_[li - 1];
    if (a <= wleft) { --li; continue; }
    A_lo = a;
    break;
  }
  int ri = j;
  double A_hi = kInf;
  while (!degenerate && ri < n) {
    const EnvPoint& w = winners_[ri];
    const double c = h0 - w.h;
    const double s = (w.v - v0) / kSqrt2;
    if (c <= -s) { ++ri; continue; }
    if (c >= s) { degenerate = true; break; }
    double a = crossing2(v0, h0, w.v, w.h);  // new wins on (-inf, a)
    double wright = (ri == n - 1) ? kInf : breaks_[ri];
    if (a >= wright) { ++ri; continue; }
    A_hi = a;
    break;
  }
  if (degenerate || !(A_lo < A_hi)) {  // borderline tie: leave unchanged
    if (inserted) *inserted = false;
    return *this;
  }
  Envelope env;
  env.winners_.reserve(li + 2 + (n - ri));
  env.breaks_.reserve(env.winners_.capacity());
  for (int i = 0; i <= li; ++i) env.winners_.push_back(winners_[i]);
  for (int i = 0; i < li; ++i) env.breaks_.push_back(breaks_[i]);
  if (li >= 0) env.breaks_.push_back(A_lo);
  env.winners_.push_back({v0, h0, id});
  if (ri < n) env.breaks_.push_back(A_hi);
  for (int i = ri; i < n; ++i) env.winners_.push_back(winners_[i]);
  for (int i = ri; i < n - 1; ++i) env.breaks_.push_back(breaks_[i]);
  if (inserted) *inserted = true;
  return env;
}

int Envelope::winner_position(int id) const {
  for (int i = 0; i < static_cast<int>(winners_.size()); ++i)
    if (winners_[i].id == id) return i;
  return -1;
}

double Envelope::xi1(int pos) const {
  if (pos < 0) return 0.0;
  const int n = static_cast<int>(winners_.size());
  int adj = (pos > 0 ? 1 : 0) + (pos < n - 1 ? 1 : 0);
  return 0.5 * adj;
}

namespace {

// Exact integral of e^{2(b - G2(v - a))} over [vl, vr]:
// e^{2b} sqrt(2) [tanh((v - a)/sqrt(2))].
double span_integral_exact(double a, double b, double vl, double vr) {
  return std::exp(2.0 * b) * kSqrt2 *
         (std::tanh((vr - a) / kSqrt2) - std::tanh((vl - a) / kSqrt2));
}

template <typename F>
double adaptive_simpson(const F& f, double a, double b, double fa, double fm, double fb,
                        double whole, double tol, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, tol * 0.5, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, tol * 0.5, depth - 1);
}

template <typename F>
double integrate(const F& f, double a, double b, double rtol) {
  double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  double tol = std::max(std::abs(whole), 1e-300) * rtol;
  return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 40);
}

}  // namespace

double Envelope::xi_v(int pos) const {
  if (pos < 0) return 0.0;
  const int n = static_cast<int>(winners_.size());
  double total = 0.0;
  if (pos > 0) {
    double a = breaks_[pos - 1];
    double b = winners_[pos].h + G2(winners_[pos].v - a);
    total += span_integral_exact(a, b, winners_[pos - 1].v, winners_[pos].v);
  }
  if (pos < n - 1) {
    double a = breaks_[pos];
    double b = winners_[pos].h + G2(winners_[pos].v - a);
    total += span_integral_exact(a, b, winners_[pos].v, winners_[pos + 1].v);
  }
  return total / (2.0 * kSqrt2);
}

double Envelope::xi_v_quadrature(int pos, double rtol) const {
  if (pos < 0) return 0.0;
  const int n = static_cast<int>(winners_.size());
  double total = 0.0;
  auto span = [&](double a, double b, double vl, double vr) {
    auto f = [&](double v) { return std::exp(2.0 * (b - G2(v - a))); };
    return integrate(f, vl, vr, rtol);
  };
  if (pos > 0) {
    double a = breaks_[pos - 1];
    double b = winners_[pos].h + G2(winners_[pos].v - a);
    total += span(a, b, winners_[pos - 1].v, winners_[pos].v);
  }
  if (pos < n - 1) {
    double a = breaks_[pos];
    double b = winners_[pos].h + G2(winners_[pos].v - a);
    total += span(a, b, winners_[pos].v, winners_[pos + 1].v);
  }
  return total / (2.0 * kSqrt2);
}

// -------------------------------------------------------------------- model

namespace {

const rescale::ConeFunction& shared_cone(int d) {
  static const rescale::ConeFunction cf2 = rescale::make_cone_function(2);
  static const rescale::ConeFunction cf3 = rescale::make_cone_function(3);
  if (d == 2) return cf2;
  if (d == 3) return cf3;
  throw DimensionUnsupported("festoon supports d in {2, 3}");
}

std::vector<EnvPoint> to_env_points(const std::vector<RescaledPoint>& pts) {
  std::vector<EnvPoint> out;
  out.reserve(pts.size());
  for (int i = 0; i < static_cast<int>(pts.size()); ++i)
    out.push_back({pts[i].v(0), pts[i].h, i});
  return out;
}

void reject_near_duplicates(const std::vector<RescaledPoint>& pts) {
  std::vector<int> order(pts.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return pts[a].v(0) < pts[b].v(0); });
  for (size_t i = 0; i + 1 < order.size(); ++i) {
    for (size_t j = i + 1; j < order.size(); ++j) {
      if (pts[order[j]].v(0) - pts[order[i]].v(0) > kTieTol) break;
      if (std::abs(pts[order[j]].h - pts[order[i]].h) <= kTieTol)
        throw DegenerateInput("festoon model: points closer than 1e-9");
    }
  }
}

// d=3 extremality margin of point i: min over a of f_i(a) - min_{q != i} f_q(a).
double margin3(const std::vector<RescaledPoint>& pts, int i,
               const rescale::ConeFunction& cf, Vec& best_a) {
  auto others_min = [&](const Vec& a) {
    double m = kInf;
    for (int q = 0; q < static_cast<int>(pts.size()); ++q) {
      if (q == i) continue;
      m = std::min(m, pts[q].h + cf(pts[q].v - a));
    }
    return m;
  };
  auto phi = [&](const Vec& a) { return pts[i].h + cf(pts[i].v - a) - others_min(a); };
  // coarse grid around the data
  double lo0 = kInf, hi0 = -kInf, lo1 = kInf, hi1 = -kInf;
  for (const auto& p : pts) {
    lo0 = std::min(lo0, p.v(0)); hi0 = std::max(hi0, p.v(0));
    lo1 = std::min(lo1, p.v(1)); hi1 = std::max(hi1, p.v(1));
  }
  const double pad = 2.5, eta = 0.05;
  double best = kInf;
  Vec a(2);
  for (double x = lo0 - pad; x <= hi0 + pad; x += eta) {
    for (double y = lo1 - pad; y <= hi1 + pad; y += eta) {
      a << x, y;
      double val = phi(a);
      if (val < best) { best = val; best_a = a; }
    }
  }
  // local pattern-search refinement
  double step = eta;
  Vec cur = best_a;
  while (step > 1e-7) {
    bool improved = false;
    for (int dim = 0; dim < 2; ++dim) {
      for (double sgn : {1.0, -1.0}) {
        Vec cand = cur;
        cand(dim) += sgn * step;
        double val = phi(cand);
        if (val < best) { best = val; cur = cand; improved = true; }
      }
    }
    if (!improved) step *= 0.5;
  }
  best_a = cur;
  return best;
}

}  // namespace

FestoonModel build_festoon(const std::vector<RescaledPoint>& pts, int d) {
  if (d != 2 && d != 3) throw DimensionUnsupported("festoon supports d in {2, 3}");
  FestoonModel m;
  m.d = d;
  m.points = pts;
  m.cf = &shared_cone(d);
  if (d == 2) {
    reject_near_duplicates(pts);
    m.env = Envelope::build(to_env_points(pts));
    m.extreme.resize(pts.size(), 0);
    for (size_t i = 0; i < pts.size(); ++i)
      m.extreme[i] = m.env.admits(pts[i].v(0), pts[i].h, kTieTol) ? 1 : 0;
  } else {
    m.extreme = ext_points(pts, d);
  }
  return m;
}

std::pair<double, std::vector<int>> envelope_min(const Vec& a,
                                                 const std::vector<RescaledPoint>& pts,
                                                 const rescale::ConeFunction& cf) {
  if (pts.empty()) throw EmptyInput("envelope_min on empty point set");
  double best = kInf;
  std::vector<double> vals(pts.size());
  for (size_t q = 0; q < pts.size(); ++q) {
    vals[q] = pts[q].h + cf(pts[q].v - a);
    best = std::min(best, vals[q]);
  }
  std::vector<int> arg;
  for (size_t q = 0; q < pts.size(); ++q)
    if (vals[q] <= best + kTieTol) arg.push_back(static_cast<int>(q));
  return {best, arg};
}

std::vector<char> ext_points(const std::vector<RescaledPoint>& pts, int d) {
  std::vector<char> flags(pts.size(), 0);
  if (pts.empty()) return flags;
  if (d == 2) {
    Envelope env = Envelope::build(to_env_points(pts));
    for (size_t i = 0; i < pts.size(); ++i)
      flags[i] = env.admits(pts[i].v(0), pts[i].h, kTieTol) ? 1 : 0;
    return flags;
  }
  if (d != 3) throw DimensionUnsupported("ext_points supports d in {2, 3}");
  const auto& cf = shared_cone(3);
  if (pts.size() == 1) {
    flags[0] = 1;
    return flags;
  }
  Vec best_a(2);
  for (size_t i = 0; i < pts.size(); ++i)
    flags[i] = margin3(pts, static_cast<int>(i), cf, best_a) <= kTieTol ? 1 : 0;
  return flags;
}

std::vector<FestoonFace> festoon_faces(const FestoonModel& m) {
  if (m.d != 2) throw DimensionUnsupported("festoon faces are exact for d=2 only");
  std::vector<FestoonFace> faces;
  const auto& W = m.env.winners();
  const auto& B = m.env.breakpoints();
  const int n = static_cast<int>(W.size());
  if (n == 0) return faces;
  auto apex_at = [&](double a) {
    RescaledPoint w;
    w.v = Vec::Constant(1, a);
    w.h = m.env.value(a);
    return w;
  };
  auto verify = [&](const FestoonFace& f) {
    for (int g : f.gens) {
      double fv = m.points[g].h + G2(m.points[g].v(0) - f.apex.v(0));
      if (std::abs(fv - f.apex.h) > kTieTol)
        throw DegenerateInput("festoon face witness is off the grain boundary");
    }
    for (const auto& p : m.points) {
      double fv = p.h + G2(p.v(0) - f.apex.v(0));
      if (fv < f.apex.h - kTieTol)
        throw DegenerateInput("festoon face witness grain contains a point");
    }
  };
  for (int i = 0; i < n; ++i) {
    double a;
    if (n == 1) a = W[i].v;
    else if (i == 0) a = B[0] - 1.0;
    else if (i == n - 1) a = B[n - 2] + 1.0;
    else a = 0.5 * (B[i - 1] + B[i]);
    FestoonFace f;
    f.k = 0;
    f.gens = {W[i].id};
    f.apex = apex_at(a);
    verify(f);
    faces.push_back(std::move(f));
  }
  for (int i = 0; i + 1 < n; ++i) {
    FestoonFace f;
    f.k = 1;
    f.gens = {W[i].id, W[i + 1].id};
    f.apex = apex_at(B[i]);
    verify(f);
    faces.push_back(std::move(f));
  }
  return faces;
}

double boundary_height(const Vec& v, const FestoonModel& m) {
  if (m.points.empty()) throw EmptyInput("boundary height on empty model");
  if (m.d == 2) return m.env.boundary_height(v(0));
  // d=3: maximize E(a) - G(v - a) by grid plus pattern search
  const auto& cf = *m.cf;
  auto psi = [&](const Vec& a) {
    double e = kInf;
    for (const auto& p : m.points) e = std::min(e, p.h + cf(p.v - a));
    return e - cf(v - a);
  };
  double lo0 = kInf, hi0 = -kInf, lo1 = kInf, hi1 = -kInf;
  for (const auto& p : m.points) {
    lo0 = std::min(lo0, p.v(0)); hi0 = std::max(hi0, p.v(0));
    lo1 = std::min(lo1, p.v(1)); hi1 = std::max(hi1, p.v(1));
  }
  lo0 = std::min(lo0, v(0)); hi0 = std::max(hi0, v(0));
  lo1 = std::min(lo1, v(1)); hi1 = std::max(hi1, v(1));
  const double pad = 2.5, eta = 0.05;
  double best = -kInf;
  Vec a(2), arg(2);
  for (double x = lo0 - pad; x <= hi0 + pad; x += eta)
    for (double y = lo1 - pad; y <= hi1 + pad; y += eta) {
      a << x, y;
      double val = psi(a);
      if (val > best) { best = val; arg = a; }
    }
  double step = eta;
  while (step > 1e-7) {
    bool improved = false;
    for (int dim = 0; dim < 2; ++dim)
      for (double sgn : {1.0, -1.0}) {
        Vec cand = arg;
        cand(dim) += sgn * step;
        double val = psi(cand);
        if (val > best) { best = val; arg = cand; improved = true; }
      }
    if (!improved) step *= 0.5;
  }
  return best;
}

double xi_k_inf(int index, const FestoonModel& m, int k) {
  if (m.d != 2) throw DimensionUnsupported("limit face scores are d=2 only");
  if (!m.extreme[index]) return 0.0;
  int pos = m.env.winner_position(index);
  if (pos < 0) return 0.0;  // tie-extreme but not a winner: no face ownership
  if (k == 0) return 1.0;
  if (k == 1) return m.env.xi1(pos);
  return 0.0;
}

double xi_v_inf(int index, const FestoonModel& m) {
  if (m.d != 2) throw DimensionUnsupported("limit volume score is d=2 only");
  if (!m.extreme[index]) return 0.0;
  int pos = m.env.winner_position(index);
  if (pos < 0) return 0.0;
  return m.env.xi_v_quadrature(pos);
}

// ------------------------------------------------------------- window draws

std::vector<EnvPoint> sample_window_points(const FestoonWindow& w,
                                           const sampling::RunSeed& seed) {
  std::vector<EnvPoint> kept;
  Envelope env;
  const double slab = 1.0;
  int next_id = 0;
  int k = 0;
  for (double lo = w.h_min; lo < w.h_max; lo += slab, ++k) {
    double hi = std::min(lo + slab, w.h_max);
    if (!env.empty() && lo > env.ceiling(w.L)) break;  // provably irrelevant
    auto gen = seed.child(static_cast<std::uint32_t>(k)).rng();
    double mass = kSqrt2 * 2.0 * w.L * (std::exp(2.0 * hi) - std::exp(2.0 * lo)) / 2.0;
    std::poisson_distribution<long> pois(mass);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    long n = pois(gen);
    const double elo = std::exp(2.0 * lo), ehi = std::exp(2.0 * hi);
    for (long i = 0; i < n; ++i) {
      double v = w.L * (2.0 * u01(gen) - 1.0);
      double h = 0.5 * std::log(elo + u01(gen) * (ehi - elo));
      if (env.empty() || env.admits(v, h, 1e-12)) kept.push_back({v, h, next_id++});
    }
    env = Envelope::build(kept);
  }
  return kept;
}

// -------------------------------------------------------------- GL nodes

void gauss_legendre(int n, double a, double b, std::vector<double>& nodes,
                    std::vector<double>& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Newton iteration from the Chebyshev-like initial guess.
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double wgt = 2.0 / ((1.0 - x * x) * pp * pp);
    nodes[i] = 0.5 * (b - a) * (-x) + 0.5 * (a + b);
    nodes[n - 1 - i] = 0.5 * (b - a) * x + 0.5 * (a + b);
    weights[i] = weights[n - 1 - i] = 0.5 * (b - a) * wgt;
  }
}

// --------------------------------------------------------------- statistics

namespace {

double score_at(const Envelope& env, int id, ScoreKind kind) {
  int pos = env.winner_position(id);
  if (pos < 0) return 0.0;
  switch (kind) {
    case ScoreKind::Xi0: return 1.0;
    case ScoreKind::Xi1: return env.xi1(pos);
    case ScoreKind::XiV: return env.xi_v(pos);
  }
  return 0.0;
}

}  // namespace

Estimate mean_score_integral(ScoreKind kind, const FestoonWindow& w, int reps,
                             const sampling::RunSeed& seed) {
  std::vector<double> h0, wt;
  gauss_legendre(41, -6.0, 4.0, h0, wt);
  std::vector<double> I(reps, 0.0);
  for (int r = 0; r < reps; ++r) {
    auto pts = sample_window_points(w, seed.child(r));
    Envelope env = Envelope::build(pts);
    for (size_t j = 0; j < h0.size(); ++j) {
      bool in = false;
      Envelope e = env.insert(0.0, h0[j], -1, &in);
      double xi = in ? score_at(e, -1, kind) : 0.0;
      I[r] += wt[j] * std::exp(2.0 * h0[j]) * xi;
    }
  }
  Estimate est;
  for (double x : I) est.value += x;
  est.value /= reps;
  double var = 0.0;
  for (double x : I) var += sq(x - est.value);
  est.se = std::sqrt(var / (reps - 1.0) / reps);
  return est;
}

Estimate correlation_c(ScoreKind kind, const RescaledPoint& w1, const RescaledPoint& w2,
                       int reps, const sampling::RunSeed& seed, const FestoonWindow& w) {
  std::vector<double> p(reps), s1(reps), s2(reps);
  for (int r = 0; r < reps; ++r) {
    auto pts = sample_window_points(w, seed.child(r));
    Envelope env = Envelope::build(pts);
    bool in1 = false, in2 = false;
    Envelope e1 = env.insert(w1.v(0), w1.h, -1, &in1);
    s1[r] = in1 ? score_at(e1, -1, kind) : 0.0;
    Envelope e2 = env.insert(w2.v(0), w2.h, -2, &in2);
    s2[r] = in2 ? score_at(e2, -2, kind) : 0.0;
    if (in1) {
      bool in12 = false;
      Envelope e12 = e1.insert(w2.v(0), w2.h, -2, &in12);
      double a = score_at(e12, -1, kind);
      double b = in12 ? score_at(e12, -2, kind) : 0.0;
      p[r] = a * b;
    } else {
      p[r] = 0.0;  // w1 not extreme in P+w1 => not extreme in P+w1+w2
    }
  }
  double Sp = 0, S1 = 0, S2 = 0;
  for (int r = 0; r < reps; ++r) { Sp += p[r]; S1 += s1[r]; S2 += s2[r]; }
  const double R = reps;
  Estimate est;
  est.value = Sp / R - (S1 / R) * (S2 / R);
  // jackknife
  std::vector<double> cj(reps);
  double mean_cj = 0.0;
  for (int r = 0; r < reps; ++r) {
    cj[r] = (Sp - p[r]) / (R - 1) - (S1 - s1[r]) * (S2 - s2[r]) / sq(R - 1);
    mean_cj += cj[r];
  }
  mean_cj /= R;
  double ss = 0.0;
  for (double c : cj) ss += sq(c - mean_cj);
  est.se = std::sqrt((R - 1) / R * ss);
  return est;
}

Sigma2Result sigma2(ScoreKind kind, const FestoonWindow& w, int reps,
                    const sampling::RunSeed& seed, int blocks) {
  std::vector<double> h0, wh0, v1, wv1, h1, wh1;
  gauss_legendre(41, -6.0, 4.0, h0, wh0);
  gauss_legendre(81, -20.0, 20.0, v1, wv1);
  gauss_legendre(41, -6.0, 4.0, h1, wh1);
  const int J = static_cast<int>(h0.size());
  const int K = static_cast<int>(v1.size());
  const int L = static_cast<int>(h1.size());
  const int KL = K * L;
  const int JKL = J * KL;

  blocks = std::max(2, std::min(blocks, reps));
  std::vector<int> nb(blocks, 0);
  std::vector<std::vector<double>> Bs0(blocks, std::vector<double>(J, 0.0));
  std::vector<std::vector<double>> Bs0sq(blocks, std::vector<double>(J, 0.0));
  std::vector<std::vector<double>> Bs1(blocks, std::vector<double>(KL, 0.0));
  std::vector<std::vector<double>> Bprod(blocks, std::vector<double>(JKL, 0.0));

  for (int r = 0; r < reps; ++r) {
    const int b = r % blocks;
    ++nb[b];
    auto pts = sample_window_points(w, seed.child(r));
    Envelope env = Envelope::build(pts);

    std::vector<Envelope> e0(J);
    std::vector<double> s0(J);
    for (int j = 0; j < J; ++j) {
      bool in = false;
      e0[j] = env.insert(0.0, h0[j], -1, &in);
      s0[j] = in ? score_at(e0[j], -1, kind) : 0.0;
      Bs0[b][j] += s0[j];
      Bs0sq[b][j] += sq(s0[j]);
    }
    for (int k = 0; k < K; ++k) {
      for (int l = 0; l < L; ++l) {
        const int kl = k * L + l;
        bool in1 = false;
        Envelope e1 = env.insert(v1[k], h1[l], -2, &in1);
        double s1 = in1 ? score_at(e1, -2, kind) : 0.0;
        Bs1[b][kl] += s1;
        if (!in1) continue;  // product vanishes for every h0
        for (int j = 0; j < J; ++j) {
          if (s0[j] == 0.0) continue;  // w0 cannot be extreme with more points
          bool in01 = false;
          Envelope e01 = e1.insert(0.0, h0[j], -1, &in01);
          if (!in01) continue;
          double a = score_at(e01, -1, kind);
          double bb = score_at(e01, -2, kind);
          if (a != 0.0 && bb != 0.0) Bprod[b][j * KL + kl] += a * bb;
        }
      }
    }
  }

  auto eval_block = [&](int b, double& t1, double& t2) {
    const double n = static_cast<double>(nb[b]);
    t1 = 0.0;
    for (int j = 0; j < J; ++j)
      t1 += wh0[j] * std::exp(2.0 * h0[j]) * (Bs0sq[b][j] / n);
    t1 *= kSqrt2;
    t2 = 0.0;
    for (int j = 0; j < J; ++j) {
      for (int k = 0; k < K; ++k) {
        for (int l = 0; l < L; ++l) {
          const int kl = k * L + l;
          double c = Bprod[b][j * KL + kl] / n - (Bs0[b][j] / n) * (Bs1[b][kl] / n);
          t2 += wh0[j] * wv1[k] * wh1[l] * std::exp(2.0 * (h0[j] + h1[l])) * c;
        }
      }
    }
    t2 *= 2.0;
  };

  Sigma2Result res;
  std::vector<double> vals(blocks);
  double t1sum = 0.0, t2sum = 0.0;
  for (int b = 0; b < blocks; ++b) {
    double t1, t2;
    eval_block(b, t1, t2);
    vals[b] = t1 + t2;
    t1sum += t1;
    t2sum += t2;
  }
  res.term1 = t1sum / blocks;
  res.term2 = t2sum / blocks;
  for (double x : vals) res.value += x;
  res.value /= blocks;
  double ss = 0.0;
  for (double x : vals) ss += sq(x - res.value);
  res.se = std::sqrt(ss / (blocks - 1.0) / blocks);
  return res;
}

double simplex_volume_Sd(int d) {
  double fact = 1.0;
  for (int i = 2; i <= d - 1; ++i) fact *= i;
  return std::pow(static_cast<double>(d), d - 1) * std::sqrt(static_cast<double>(d)) / fact;
}

double limit_constant_F(int d, double sigma2_value) {
  return std::pow(static_cast<double>(d), -d + 1) * simplex_volume_Sd(d) * sigma2_value;
}

void write_festoon_json(const std::string& path, const FestoonModel& m,
                        double resolution) {
  nlohmann::json j;
  j["d"] = m.d;
  for (size_t i = 0; i < m.points.size(); ++i) {
    nlohmann::json p;
    for (int c = 0; c < m.points[i].v.size(); ++c) p["v"].push_back(m.points[i].v(c));
    p["h"] = m.points[i].h;
    p["extreme"] = static_cast<bool>(m.extreme[i]);
    j["points"].push_back(p);
  }
  if (m.d == 2) {
    j["breakpoints"] = m.env.breakpoints();
    for (const auto& f : festoon_faces(m)) {
      nlohmann::json jf;
      jf["k"] = f.k;
      jf["generators"] = f.gens;
      jf["apex"] = {f.apex.v(0), f.apex.h};
      j["faces"].push_back(jf);
    }
    if (!m.env.winners().empty()) {
      double lo = m.env.winners().front().v - 2.0;
      double hi = m.env.winners().back().v + 2.0;
      nlohmann::json poly;
      for (double v = lo; v <= hi; v += resolution)
        poly.push_back({v, m.env.boundary_height(v)});
      j["boundary"] = poly;
    }
  }
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open output file: " + path);
  f << j.dump(2) << "\n";
}

}  // namespace polyscale::festoon
