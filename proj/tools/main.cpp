#include "polyscale/festoon.hpp"
#include "polyscale/floating.hpp"
#include "polyscale/geometry.hpp"
#include "polyscale/harness.hpp"
#include "polyscale/rescale.hpp"
#include "polyscale/sampling.hpp"
#include "polyscale/scores.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

namespace ps = polyscale;

namespace {

ps::geometry::SimplePolytope body_of(const std::string& name, int d) {
  if (name == "triangle") {
    if (d != 2) throw ps::ConfigError("triangle requires --dim 2");
    return ps::geometry::SimplePolytope::triangle();
  }
  if (name == "cube") return ps::geometry::SimplePolytope::cube(d);
  throw ps::ConfigError("unknown body: " + name);
}

std::filesystem::path out_path(const std::string& dir, const std::string& file) {
  std::filesystem::path p(dir);
  if (!p.empty()) std::filesystem::create_directories(p);
  return p / file;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"polyscale: random polytopes in simple polytopes"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string body = "cube";
  int dim = 2;
  double lambda = 1000.0;
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  int threads = 1;
  app.add_option("--dim", dim, "ambient dimension (2 or 3)");
  app.add_option("--seed", seed, "master seed");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--threads", threads, "worker threads");

  auto* c_sample = app.add_subcommand("sample", "Poisson sample on a body, CSV dump");
  c_sample->add_option("--body", body);
  c_sample->add_option("--lambda", lambda);

  auto* c_hull = app.add_subcommand("hull", "sample, hull, print the f-vector");
  c_hull->add_option("--body", body);
  c_hull->add_option("--lambda", lambda);

  auto* c_rescale = app.add_subcommand(
      "rescale", "sample, map the corner box through the scaling transform");
  c_rescale->add_option("--body", body);
  c_rescale->add_option("--lambda", lambda);

  auto* c_scores = app.add_subcommand("scores", "per-point score table, CSV dump");
  c_scores->add_option("--body", body);
  c_scores->add_option("--lambda", lambda);

  double fest_L = 12.0, fest_hmin = -8.0, fest_hmax = 6.0;
  auto* c_festoon =
      app.add_subcommand("festoon", "limit-process draw and festoon JSON dump");
  c_festoon->add_option("--L", fest_L);
  c_festoon->add_option("--hmin", fest_hmin);
  c_festoon->add_option("--hmax", fest_hmax);

  std::string exp_kind = "variance-scan";
  std::string config_path;
  std::vector<std::string> overrides;
  bool have_seed = false, have_out = false, have_threads = false;
  auto* c_exp = app.add_subcommand("experiment", "run a configured experiment");
  c_exp->add_option("kind", exp_kind, "experiment kind");
  c_exp->add_option("--config", config_path, "key = value config file");
  c_exp->add_option("--set", overrides, "config override key=value (repeatable)");

  try {
    app.parse(argc, argv);
    have_seed = app.count("--seed") > 0;
    have_out = app.count("--out") > 0;
    have_threads = app.count("--threads") > 0;

    ps::sampling::RunSeed root{seed, {}};
    if (c_sample->parsed()) {
      auto K = body_of(body, dim);
      auto s = ps::sampling::sample_homogeneous(K, lambda, root);
      auto path = out_path(out_dir, "points.csv");
      ps::sampling::write_points_csv(path.string(), s.points, dim);
      std::cout << "wrote " << s.points.size() << " points to " << path << "\n";
    } else if (c_hull->parsed()) {
      auto K = body_of(body, dim);
      auto s = ps::sampling::sample_homogeneous(K, lambda, root);
      auto hull = ps::geometry::convex_hull(s.points, dim);
      auto fc = ps::geometry::face_counts(hull);
      std::cout << "n = " << s.points.size() << "  f = (";
      for (int k = 0; k < dim; ++k) std::cout << (k ? ", " : "") << fc.f(k);
      std::cout << ")  volume = " << ps::geometry::hull_volume(hull, s.points)
                << "\n";
    } else if (c_rescale->parsed()) {
      auto K = body_of(body, dim);
      auto s = ps::sampling::sample_homogeneous(K, lambda, root);
      auto basis = ps::rescale::v_basis(dim);
      double delta0 = ps::rescale::ScaleParams(lambda, dim).delta0;
      std::vector<ps::RescaledPoint> win;
      for (const auto& z : s.points) {
        if ((z.array() <= 0.0).any() || (z.array() > delta0).any()) continue;
        win.push_back(ps::rescale::forward(z, lambda, basis));
      }
      auto path = out_path(out_dir, "rescaled.csv");
      ps::sampling::write_rescaled_csv(path.string(), win, dim);
      std::cout << "wrote " << win.size() << " window points to " << path << "\n";
    } else if (c_scores->parsed()) {
      auto K = body_of(body, dim);
      auto s = ps::sampling::sample_homogeneous(K, lambda, root);
      double delta0 = ps::rescale::ScaleParams(lambda, dim).delta0;
      auto table = ps::scores::build_score_table(s.points, K, lambda, delta0, seed);
      auto path = out_path(out_dir, "scores.csv");
      ps::scores::write_score_table_csv(path.string(), table);
      std::cout << "wrote score table (" << s.points.size() << " points) to "
                << path << "\n";
    } else if (c_festoon->parsed()) {
      ps::festoon::FestoonWindow w;
      w.L = fest_L;
      w.h_min = fest_hmin;
      w.h_max = fest_hmax;
      auto ep = ps::festoon::sample_window_points(w, root);
      std::vector<ps::RescaledPoint> pts(ep.size());
      for (std::size_t i = 0; i < ep.size(); ++i) {
        pts[i].v = ps::Vec::Constant(1, ep[i].v);
        pts[i].h = ep[i].h;
      }
      auto model = ps::festoon::build_festoon(pts, 2);
      auto path = out_path(out_dir, "festoon.json");
      ps::festoon::write_festoon_json(path.string(), model, 0.05);
      std::cout << "wrote festoon (" << pts.size() << " points, "
                << model.env.winners().size() << " extreme) to " << path << "\n";
    } else if (c_exp->parsed()) {
      ps::harness::ExperimentConfig cfg;
      if (!config_path.empty()) cfg = ps::harness::load_config(config_path);
      cfg.kind = exp_kind;
      for (const auto& ov : overrides) {
        auto eq = ov.find('=');
        if (eq == std::string::npos)
          throw ps::ConfigError("--set expects key=value, got: " + ov);
        ps::harness::apply_override(cfg, ov.substr(0, eq), ov.substr(eq + 1));
      }
      if (have_seed) cfg.seed = seed;
      if (have_out) cfg.out_dir = out_dir;
      if (have_threads) cfg.threads = threads;
      cfg.validate();
      auto t0 = std::chrono::steady_clock::now();
      auto rows = ps::harness::run_experiment(cfg);
      double wall = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
      auto csv = out_path(cfg.out_dir, "results.csv");
      ps::harness::write_results_csv(csv.string(), rows);
      ps::harness::write_meta_file(out_path(cfg.out_dir, "meta.txt").string(), cfg,
                                   wall);
      std::cout << "wrote " << rows.size() << " result rows to " << csv << "\n";
    }
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ps::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
