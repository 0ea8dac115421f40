#include "polyscale/harness.hpp"

#include "polyscale/rescale.hpp"
#include "polyscale/scores.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

namespace polyscale::harness {

namespace {

double now_s() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("bad numeric value for '" + key + "': " + v);
  }
}

long long parse_int(const std::string& key, const std::string& v) {
  double x = parse_double(key, v);
  if (x != std::floor(x)) throw ConfigError("expected integer for '" + key + "': " + v);
  return static_cast<long long>(x);
}

// Runs fn(r) for r in [0, reps) split over cfg-many threads. Results must be
// written into preallocated per-index slots so the output is independent of
// the thread count.
void parallel_reps(int reps, int threads, const std::function<void(int)>& fn) {
  threads = std::max(1, std::min(threads, reps));
  if (threads == 1) {
    for (int r = 0; r < reps; ++r) fn(r);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (int r = t; r < reps; r += threads) fn(r);
    });
  }
  for (auto& th : pool) th.join();
}

void append_moment_rows(std::vector<ResultRow>& rows, const std::string& exp,
                        double lambda, const std::string& name,
                        const std::vector<double>& x, double norm, double wall) {
  MomentStats m = moment_stats(x);
  int n = static_cast<int>(x.size());
  rows.push_back({exp, lambda, name + "_mean", m.mean, m.mean_se, n, wall});
  rows.push_back({exp, lambda, name + "_var", m.var, m.var_se, n, wall});
  rows.push_back({exp, lambda, name + "_var_norm", m.var / norm, m.var_se / norm, n, wall});
}

int count_window_extremes(const std::vector<RescaledPoint>& pts, double v_cut) {
  if (pts.empty()) return 0;
  std::vector<festoon::EnvPoint> ep(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i)
    ep[i] = {pts[i].v(0), pts[i].h, static_cast<int>(i)};
  festoon::Envelope env = festoon::Envelope::build(ep);
  int count = 0;
  for (const auto& w : env.winners())
    if (std::abs(w.v) <= v_cut) ++count;
  return count;
}

int count_window_extremes(const std::vector<festoon::EnvPoint>& pts, double v_cut) {
  if (pts.empty()) return 0;
  festoon::Envelope env = festoon::Envelope::build(pts);
  int count = 0;
  for (const auto& w : env.winners())
    if (std::abs(w.v) <= v_cut) ++count;
  return count;
}

}  // namespace

// --------------------------------------------------------------- config

void ExperimentConfig::validate() const {
  static const std::vector<std::string> kinds = {
      "variance-scan", "limit-constants", "convergence", "decomposition",
      "diagnostics"};
  if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end())
    throw ConfigError("unknown experiment kind: " + kind);
  if (body != "cube" && body != "triangle")
    throw ConfigError("unknown body: " + body);
  if (d < 2 || d > 3) throw ConfigError("d must be 2 or 3");
  if (body == "triangle" && d != 2) throw ConfigError("triangle requires d = 2");
  if (lambdas.empty()) throw ConfigError("lambda grid is empty");
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (lambdas[i] < 3.0) throw ConfigError("lambda values must be >= 3");
    if (i > 0 && lambdas[i] <= lambdas[i - 1])
      throw ConfigError("lambda grid must be strictly increasing");
  }
  if (reps < 2) throw ConfigError("reps must be >= 2");
  if (score_kinds.empty()) throw ConfigError("score_kinds is empty");
  for (const auto& k : score_kinds)
    if (k != "xi0" && k != "xi1" && k != "xiV")
      throw ConfigError("unknown score kind: " + k);
  if (limit_reps < 2) throw ConfigError("limit_reps must be >= 2");
  if (threads < 1) throw ConfigError("threads must be >= 1");
  if (window.L <= 0.0) throw ConfigError("window_L must be positive");
  if (window.h_min >= window.h_max) throw ConfigError("window h_min must be < h_max");
}

void apply_override(ExperimentConfig& cfg, const std::string& key,
                    const std::string& value) {
  if (key == "kind") {
    cfg.kind = value;
  } else if (key == "body") {
    cfg.body = value;
  } else if (key == "d") {
    cfg.d = static_cast<int>(parse_int(key, value));
  } else if (key == "lambdas") {
    cfg.lambdas.clear();
    std::stringstream ss(value);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      tok = trim(tok);
      if (!tok.empty()) cfg.lambdas.push_back(parse_double(key, tok));
    }
  } else if (key == "reps") {
    cfg.reps = static_cast<int>(parse_int(key, value));
  } else if (key == "limit_reps") {
    cfg.limit_reps = static_cast<int>(parse_int(key, value));
  } else if (key == "score_kinds") {
    cfg.score_kinds.clear();
    std::stringstream ss(value);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      tok = trim(tok);
      if (!tok.empty()) cfg.score_kinds.push_back(tok);
    }
  } else if (key == "seed") {
    cfg.seed = static_cast<std::uint64_t>(parse_int(key, value));
  } else if (key == "out_dir" || key == "out") {
    cfg.out_dir = value;
  } else if (key == "threads") {
    cfg.threads = static_cast<int>(parse_int(key, value));
  } else if (key == "window_L") {
    cfg.window.L = parse_double(key, value);
  } else if (key == "window_hmin") {
    cfg.window.h_min = parse_double(key, value);
  } else if (key == "window_hmax") {
    cfg.window.h_max = parse_double(key, value);
  } else if (key == "window_guard") {
    cfg.window.guard = parse_double(key, value);
  } else {
    throw ConfigError("unknown config key: " + key);
  }
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  ExperimentConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key = value");
    apply_override(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

geometry::SimplePolytope make_body(const ExperimentConfig& cfg) {
  if (cfg.body == "triangle") return geometry::SimplePolytope::triangle();
  return geometry::SimplePolytope::cube(cfg.d);
}

// --------------------------------------------------------------- numerics

MomentStats moment_stats(const std::vector<double>& x) {
  const int n = static_cast<int>(x.size());
  if (n < 3) throw InsufficientPoints("moment_stats needs at least 3 observations");
  double s1 = 0.0, s2 = 0.0;
  for (double v : x) {
    s1 += v;
    s2 += v * v;
  }
  MomentStats m;
  m.mean = s1 / n;
  m.var = std::max(0.0, (s2 - n * m.mean * m.mean) / (n - 1));
  m.mean_se = std::sqrt(m.var / n);
  // Jackknife over the sample variance via the leave-one-out sums.
  std::vector<double> loo(n);
  double loo_sum = 0.0;
  for (int i = 0; i < n; ++i) {
    double mu = (s1 - x[i]) / (n - 1);
    double vv = (s2 - x[i] * x[i] - (n - 1) * mu * mu) / (n - 2);
    loo[i] = std::max(0.0, vv);
    loo_sum += loo[i];
  }
  double loo_mean = loo_sum / n;
  double acc = 0.0;
  for (double v : loo) acc += (v - loo_mean) * (v - loo_mean);
  m.var_se = std::sqrt(acc * (n - 1) / n);
  return m;
}

LogPowerFit fit_log_power(const std::vector<std::pair<double, double>>& lambda_y,
                          int d) {
  const int n = static_cast<int>(lambda_y.size());
  if (n < 3) throw InsufficientPoints("fit_log_power needs at least 3 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::vector<double> xs(n), ys(n);
  for (int i = 0; i < n; ++i) {
    xs[i] = std::pow(std::log(lambda_y[i].first), d - 1);
    ys[i] = lambda_y[i].second;
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  double den = n * sxx - sx * sx;
  if (std::abs(den) < 1e-14 * (1.0 + sxx) * n)
    throw DegenerateInput("fit_log_power: abscissae are not distinct");
  LogPowerFit fit;
  fit.slope = (n * sxy - sx * sy) / den;
  fit.intercept = (sy - fit.slope * sx) / n;
  double ss_res = 0.0, ss_tot = 0.0, ybar = sy / n;
  for (int i = 0; i < n; ++i) {
    double e = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ss_res += e * e;
    ss_tot += (ys[i] - ybar) * (ys[i] - ybar);
  }
  fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res == 0.0 ? 1.0 : 0.0);
  return fit;
}

KSResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw EmptyInput("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    double t = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= t) ++i;
    while (j < b.size() && b[j] <= t) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  KSResult r;
  r.stat = d;
  double en = std::sqrt(na * nb / (na + nb));
  double lam = (en + 0.12 + 0.11 / en) * d;
  double p = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    double term = std::exp(-2.0 * k * k * lam * lam);
    p += 2.0 * sign * term;
    sign = -sign;
    if (term < 1e-12) break;
  }
  r.p = std::min(1.0, std::max(0.0, p));
  return r;
}

// --------------------------------------------------------------- replicates

geometry::HullComplex fast_hull2(const std::vector<Vec>& points,
                                 std::vector<int>* kept_out) {
  const int n = static_cast<int>(points.size());
  static const double dirs[8][2] = {{1, 0}, {1, 1},  {0, 1},  {-1, 1},
                                    {-1, 0}, {-1, -1}, {0, -1}, {1, -1}};
  std::vector<int> poly;
  for (const auto& dir : dirs) {
    int best = 0;
    double bv = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      double v = dir[0] * points[i](0) + dir[1] * points[i](1);
      if (v > bv) {
        bv = v;
        best = i;
      }
    }
    if (poly.empty() || poly.back() != best) poly.push_back(best);
  }
  while (poly.size() > 1 && poly.front() == poly.back()) poly.pop_back();

  std::vector<int> kept;
  if (poly.size() < 3) {
    kept.resize(n);
    std::iota(kept.begin(), kept.end(), 0);
  } else {
    // The extreme points were collected in counterclockwise direction
    // order, so the prefilter polygon is counterclockwise; anything
    // strictly inside every edge cannot be a hull vertex.
    const int m = static_cast<int>(poly.size());
    for (int i = 0; i < n; ++i) {
      bool inside = true;
      for (int e = 0; e < m && inside; ++e) {
        const Vec& a = points[poly[e]];
        const Vec& b = points[poly[(e + 1) % m]];
        double cr = (b(0) - a(0)) * (points[i](1) - a(1)) -
                    (b(1) - a(1)) * (points[i](0) - a(0));
        if (cr <= 1e-12) inside = false;
      }
      if (!inside) kept.push_back(i);
    }
  }
  std::vector<Vec> sub;
  sub.reserve(kept.size());
  for (int i : kept) sub.push_back(points[i]);
  if (kept_out) *kept_out = std::move(kept);
  return geometry::convex_hull(sub, 2);
}

RepSummary simulate_rep(const geometry::SimplePolytope& K, double lambda,
                        const sampling::RunSeed& seed, bool with_boxes) {
  auto sample = sampling::sample_homogeneous(K, lambda, seed);
  const auto& pts = sample.points;
  const int n = static_cast<int>(pts.size());
  RepSummary out;
  out.n_points = n;
  if (with_boxes) out.Zi.assign(K.vertices.size(), 0.0);
  if (n <= K.d) {
    // Too few points for a full-dimensional hull: every point is a vertex
    // and nothing of K is covered.
    out.f0 = n;
    out.lam_defect = lambda * K.volume;
    out.Z0 = with_boxes ? n : 0.0;
    return out;
  }

  if (!with_boxes && K.d == 2) {
    std::vector<int> kept;
    geometry::HullComplex hull = fast_hull2(pts, &kept);
    auto fc = geometry::face_counts(hull);
    out.f0 = fc.f(0);
    out.f1 = fc.f(1);
    // hull_volume needs the same point list the hull indexes into.
    std::vector<Vec> sub;
    sub.reserve(kept.size());
    for (int i : kept) sub.push_back(pts[i]);
    out.lam_defect = lambda * (K.volume - geometry::hull_volume(hull, sub));
    return out;
  }

  geometry::HullComplex hull;
  std::vector<int> kept;
  if (K.d == 2) {
    hull = fast_hull2(pts, &kept);
  } else {
    hull = geometry::convex_hull(pts, K.d);
    kept.resize(n);
    std::iota(kept.begin(), kept.end(), 0);
  }
  auto fc = geometry::face_counts(hull);
  out.f0 = fc.f(0);
  out.f1 = fc.f(1);
  if (K.d == 3) out.f2 = fc.f(2);
  std::vector<Vec> sub;
  sub.reserve(kept.size());
  for (int i : kept) sub.push_back(pts[i]);
  out.lam_defect = lambda * (K.volume - geometry::hull_volume(hull, sub));

  if (with_boxes) {
    // xi0 in d = 2 and d = 3 alike is the hull-vertex indicator; rebase the
    // prefiltered hull's vertex ids onto the full sample.
    for (int& id : hull.vertex_ids) id = kept[id];
    std::vector<double> score(n, 0.0);
    for (int id : hull.vertex_ids) score[id] = 1.0;
    double delta0 = rescale::ScaleParams(lambda, K.d).delta0;
    auto zd = scores::z_decomposition(pts, K, delta0, score);
    out.Zi = zd.Zi;
    out.Z0 = zd.Z0;
    out.cone_extreme_ok = true;
    for (int v = 0; v < static_cast<int>(K.vertices.size()) && out.cone_extreme_ok; ++v)
      out.cone_extreme_ok = scores::local_faces_cone_extreme(pts, K, v, delta0, hull);
  }
  return out;
}

// --------------------------------------------------------------- experiments

std::vector<ResultRow> run_variance_scan(const ExperimentConfig& cfg) {
  cfg.validate();
  geometry::SimplePolytope K = make_body(cfg);
  sampling::RunSeed root{cfg.seed, {}};
  std::vector<ResultRow> rows;
  const std::string exp = "variance-scan";
  for (std::size_t li = 0; li < cfg.lambdas.size(); ++li) {
    const double lambda = cfg.lambdas[li];
    double t0 = now_s();
    std::vector<RepSummary> reps(cfg.reps);
    sampling::RunSeed lseed = root.child(static_cast<std::uint32_t>(li));
    parallel_reps(cfg.reps, cfg.threads, [&](int r) {
      reps[r] = simulate_rep(K, lambda, lseed.child(static_cast<std::uint32_t>(r)), false);
    });
    double wall = now_s() - t0;
    const double norm = std::pow(std::log(lambda), cfg.d - 1);
    std::vector<double> x(cfg.reps);
    auto pull = [&](auto get) {
      for (int r = 0; r < cfg.reps; ++r) x[r] = get(reps[r]);
      return x;
    };
    append_moment_rows(rows, exp, lambda, "f0",
                       pull([](const RepSummary& s) { return s.f0; }), norm, wall);
    append_moment_rows(rows, exp, lambda, "f1",
                       pull([](const RepSummary& s) { return s.f1; }), norm, wall);
    if (cfg.d == 3)
      append_moment_rows(rows, exp, lambda, "f2",
                         pull([](const RepSummary& s) { return s.f2; }), norm, wall);
    append_moment_rows(rows, exp, lambda, "lam_defect",
                       pull([](const RepSummary& s) { return s.lam_defect; }), norm,
                       wall);
  }
  return rows;
}

std::vector<ResultRow> run_limit_constants(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.d != 2)
    throw ConfigError("limit-constants is implemented for d = 2 only");
  sampling::RunSeed root{cfg.seed, {}};
  std::vector<ResultRow> rows;
  const std::string exp = "limit-constants";

  double t0 = now_s();
  festoon::Estimate mean_int =
      festoon::mean_score_integral(festoon::ScoreKind::Xi0, cfg.window,
                                   cfg.limit_reps, root.child(1));
  rows.push_back({exp, 0.0, "mean_integral_xi0", mean_int.value, mean_int.se,
                  cfg.limit_reps, now_s() - t0});

  // The pair-correlation integral needs spatial room around the probe
  // points; widen the window if the configured one is narrow.
  festoon::FestoonWindow ws = cfg.window;
  ws.L = std::max(ws.L, 26.0);

  const double scale = festoon::limit_constant_F(2, 1.0);
  std::uint32_t child = 2;
  for (const auto& kind_name : cfg.score_kinds) {
    festoon::ScoreKind kind = kind_name == "xi0"   ? festoon::ScoreKind::Xi0
                              : kind_name == "xi1" ? festoon::ScoreKind::Xi1
                                                   : festoon::ScoreKind::XiV;
    t0 = now_s();
    festoon::Sigma2Result s =
        festoon::sigma2(kind, ws, cfg.limit_reps, root.child(child++));
    double wall = now_s() - t0;
    rows.push_back({exp, 0.0, "sigma2_" + kind_name, s.value, s.se,
                    cfg.limit_reps, wall});
    rows.push_back({exp, 0.0, "sigma2_" + kind_name + "_term1", s.term1, 0.0,
                    cfg.limit_reps, wall});
    rows.push_back({exp, 0.0, "sigma2_" + kind_name + "_term2", s.term2, 0.0,
                    cfg.limit_reps, wall});
    // F_{0,2} for the vertex-count score; V_2 for the defect-volume score.
    std::string constant_name =
        kind_name == "xi0" ? "F_0_2" : (kind_name == "xiV" ? "V_2" : "F_1_2");
    rows.push_back({exp, 0.0, constant_name, festoon::limit_constant_F(2, s.value),
                    scale * s.se, cfg.limit_reps, wall});
  }
  return rows;
}

std::vector<ResultRow> run_convergence(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.d != 2) throw ConfigError("convergence is implemented for d = 2 only");
  geometry::SimplePolytope K = make_body(cfg);
  rescale::VBasis basis = rescale::v_basis(2);
  sampling::RunSeed root{cfg.seed, {}};
  const double v_cut = 3.0;
  std::vector<ResultRow> rows;
  const std::string exp = "convergence";

  // Limit-side reference sample of window extreme-point counts.
  double t0 = now_s();
  std::vector<double> limit_counts(cfg.limit_reps);
  sampling::RunSeed lim_seed = root.child(9000);
  parallel_reps(cfg.limit_reps, cfg.threads, [&](int r) {
    auto pts = festoon::sample_window_points(
        cfg.window, lim_seed.child(static_cast<std::uint32_t>(r)));
    limit_counts[r] = count_window_extremes(pts, v_cut);
  });
  double limit_wall = now_s() - t0;
  {
    MomentStats m = moment_stats(limit_counts);
    rows.push_back({exp, 0.0, "limit_count_mean", m.mean, m.mean_se,
                    cfg.limit_reps, limit_wall});
  }

  // Same-law calibration: independent limit draw against the reference.
  t0 = now_s();
  std::vector<double> calib(cfg.limit_reps);
  sampling::RunSeed cal_seed = root.child(9001);
  parallel_reps(cfg.limit_reps, cfg.threads, [&](int r) {
    auto pts = festoon::sample_window_points(
        cfg.window, cal_seed.child(static_cast<std::uint32_t>(r)));
    calib[r] = count_window_extremes(pts, v_cut);
  });
  KSResult kc = ks_two_sample(limit_counts, calib);
  double cal_wall = now_s() - t0;
  rows.push_back({exp, 0.0, "ks_stat_null", kc.stat, 0.0, cfg.limit_reps, cal_wall});
  rows.push_back({exp, 0.0, "ks_p_null", kc.p, 0.0, cfg.limit_reps, cal_wall});

  for (std::size_t li = 0; li < cfg.lambdas.size(); ++li) {
    const double lambda = cfg.lambdas[li];
    const double delta0 = rescale::ScaleParams(lambda, 2).delta0;
    t0 = now_s();
    std::vector<double> counts(cfg.reps);
    std::vector<double> heights(cfg.reps);
    sampling::RunSeed lseed = root.child(static_cast<std::uint32_t>(li));
    parallel_reps(cfg.reps, cfg.threads, [&](int r) {
      auto sample = sampling::sample_homogeneous(
          K, lambda, lseed.child(static_cast<std::uint32_t>(r)));
      std::vector<festoon::EnvPoint> win;
      int id = 0;
      for (const auto& z : sample.points) {
        // Membership in the rescaled window is exactly z <= delta0
        // componentwise, so filter before taking logs.
        if (z(0) <= 0.0 || z(1) <= 0.0) continue;
        if (z(0) > delta0 || z(1) > delta0) continue;
        RescaledPoint w = rescale::forward(z, lambda, basis);
        win.push_back({w.v(0), w.h, id++});
      }
      counts[r] = count_window_extremes(win, v_cut);
      if (win.empty()) {
        heights[r] = 0.0;
      } else {
        festoon::Envelope env = festoon::Envelope::build(win);
        heights[r] = env.boundary_height(0.0);
      }
    });
    double wall = now_s() - t0;
    KSResult ks = ks_two_sample(counts, limit_counts);
    MomentStats mc = moment_stats(counts);
    MomentStats mh = moment_stats(heights);
    rows.push_back({exp, lambda, "count_mean", mc.mean, mc.mean_se, cfg.reps, wall});
    rows.push_back({exp, lambda, "ks_stat", ks.stat, 0.0, cfg.reps, wall});
    rows.push_back({exp, lambda, "ks_p", ks.p, 0.0, cfg.reps, wall});
    rows.push_back({exp, lambda, "height_at_0_mean", mh.mean, mh.mean_se, cfg.reps, wall});
  }
  return rows;
}

std::vector<ResultRow> run_decomposition(const ExperimentConfig& cfg) {
  cfg.validate();
  geometry::SimplePolytope K = make_body(cfg);
  sampling::RunSeed root{cfg.seed, {}};
  std::vector<ResultRow> rows;
  const std::string exp = "decomposition";
  for (std::size_t li = 0; li < cfg.lambdas.size(); ++li) {
    const double lambda = cfg.lambdas[li];
    double t0 = now_s();
    std::vector<RepSummary> reps(cfg.reps);
    sampling::RunSeed lseed = root.child(static_cast<std::uint32_t>(li));
    parallel_reps(cfg.reps, cfg.threads, [&](int r) {
      reps[r] = simulate_rep(K, lambda, lseed.child(static_cast<std::uint32_t>(r)), true);
    });
    double wall = now_s() - t0;

    const int nv = static_cast<int>(K.vertices.size());
    std::vector<double> z(cfg.reps), zi(cfg.reps), z0(cfg.reps);
    for (int r = 0; r < cfg.reps; ++r) z[r] = reps[r].f0;
    MomentStats mz = moment_stats(z);
    double sum_var_zi = 0.0, sum_var_zi_se2 = 0.0;
    for (int v = 0; v < nv; ++v) {
      for (int r = 0; r < cfg.reps; ++r) zi[r] = reps[r].Zi[v];
      MomentStats mv = moment_stats(zi);
      sum_var_zi += mv.var;
      sum_var_zi_se2 += mv.var_se * mv.var_se;
    }
    for (int r = 0; r < cfg.reps; ++r) z0[r] = reps[r].Z0;
    MomentStats m0 = moment_stats(z0);
    double remainder = std::abs(mz.var - sum_var_zi);
    double ok = 0.0;
    for (int r = 0; r < cfg.reps; ++r) ok += reps[r].cone_extreme_ok ? 1.0 : 0.0;
    double rate = ok / cfg.reps;

    rows.push_back({exp, lambda, "var_Z", mz.var, mz.var_se, cfg.reps, wall});
    rows.push_back({exp, lambda, "sum_var_Zi", sum_var_zi,
                    std::sqrt(sum_var_zi_se2), cfg.reps, wall});
    rows.push_back({exp, lambda, "remainder_ratio",
                    mz.var > 0.0 ? remainder / mz.var : 0.0, 0.0, cfg.reps, wall});
    rows.push_back({exp, lambda, "Z0_mean", m0.mean, m0.mean_se, cfg.reps, wall});
    rows.push_back({exp, lambda, "cone_extreme_rate", rate,
                    std::sqrt(std::max(rate * (1.0 - rate), 0.0) / cfg.reps),
                    cfg.reps, wall});
  }
  return rows;
}

std::vector<ResultRow> run_diagnostics(const ExperimentConfig& cfg) {
  cfg.validate();
  geometry::SimplePolytope K = make_body(cfg);
  sampling::RunSeed root{cfg.seed, {}};
  std::vector<ResultRow> rows;
  const std::string exp = "diagnostics";
  for (std::size_t li = 0; li < cfg.lambdas.size(); ++li) {
    const double lambda = cfg.lambdas[li];
    const double delta0 = rescale::ScaleParams(lambda, cfg.d).delta0;
    double t0 = now_s();
    std::vector<RepSummary> reps(cfg.reps);
    sampling::RunSeed lseed = root.child(static_cast<std::uint32_t>(li));
    parallel_reps(cfg.reps, cfg.threads, [&](int r) {
      reps[r] = simulate_rep(K, lambda, lseed.child(static_cast<std::uint32_t>(r)), true);
    });
    double wall = now_s() - t0;
    std::vector<double> n(cfg.reps), f0(cfg.reps);
    double ok = 0.0;
    for (int r = 0; r < cfg.reps; ++r) {
      n[r] = reps[r].n_points;
      f0[r] = reps[r].f0;
      ok += reps[r].cone_extreme_ok ? 1.0 : 0.0;
    }
    MomentStats mn = moment_stats(n);
    MomentStats mf = moment_stats(f0);
    double rate = ok / cfg.reps;
    rows.push_back({exp, lambda, "n_points_mean", mn.mean, mn.mean_se, cfg.reps, wall});
    rows.push_back({exp, lambda, "f0_mean", mf.mean, mf.mean_se, cfg.reps, wall});
    rows.push_back({exp, lambda, "delta0", delta0, 0.0, cfg.reps, wall});
    rows.push_back({exp, lambda, "cone_extreme_rate", rate,
                    std::sqrt(std::max(rate * (1.0 - rate), 0.0) / cfg.reps),
                    cfg.reps, wall});
  }
  return rows;
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.kind == "variance-scan") return run_variance_scan(cfg);
  if (cfg.kind == "limit-constants") return run_limit_constants(cfg);
  if (cfg.kind == "convergence") return run_convergence(cfg);
  if (cfg.kind == "decomposition") return run_decomposition(cfg);
  return run_diagnostics(cfg);
}

// --------------------------------------------------------------- output

void write_results_csv(const std::string& path, const std::vector<ResultRow>& rows) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open output file: " + path);
  out << "experiment,lambda,statistic,estimate,se,reps,wall_s\n";
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%s,%.17g,%.17g,%d,%.6g", r.lambda,
                  r.statistic.c_str(), r.estimate, r.se, r.reps, r.wall_s);
    out << r.experiment << ',' << buf << '\n';
  }
}

void write_meta_file(const std::string& path, const ExperimentConfig& cfg,
                     double wall_s) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open output file: " + path);
  out << "kind = " << cfg.kind << "\n";
  out << "body = " << cfg.body << "\n";
  out << "d = " << cfg.d << "\n";
  out << "lambdas =";
  for (std::size_t i = 0; i < cfg.lambdas.size(); ++i)
    out << (i ? "," : " ") << cfg.lambdas[i];
  out << "\n";
  out << "reps = " << cfg.reps << "\n";
  out << "limit_reps = " << cfg.limit_reps << "\n";
  out << "score_kinds =";
  for (std::size_t i = 0; i < cfg.score_kinds.size(); ++i)
    out << (i ? "," : " ") << cfg.score_kinds[i];
  out << "\n";
  out << "seed = " << cfg.seed << "\n";
  out << "threads = " << cfg.threads << "\n";
  out << "window_L = " << cfg.window.L << "\n";
  out << "window_hmin = " << cfg.window.h_min << "\n";
  out << "window_hmax = " << cfg.window.h_max << "\n";
  out << "window_guard = " << cfg.window.guard << "\n";
  out << "polyscale_version = 0.1.0\n";
  out << "eigen_version = " << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION
      << '.' << EIGEN_MINOR_VERSION << "\n";
  out << "wall_s = " << wall_s << "\n";
}

}  // namespace polyscale::harness
