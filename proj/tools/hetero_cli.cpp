#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "hetero/experiments.hpp"
#include "hetero/io.hpp"

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out, experiment, sigma_mode, bump;
  std::optional<double> n, a, a_fraction, c, omega, c_min, c_max, x0, z;
  std::optional<std::uint64_t> c_steps, length, bins, cells, t, count;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "config file (sectioned key = value)")->check(CLI::ExistingFile);
    app->add_option("--seed", seed, "master seed");
    app->add_option("--out", out, "output directory");
    app->add_option("--experiment", experiment,
                    "orbit | stationary | lyapunov | bifurcation | clt | dq | evt | micro-compare");
    app->add_option("--n", n, "noise scale parameter n");
    app->add_option("--a", a, "noise amplitude (0: admissible bound times --a-fraction)");
    app->add_option("--a-fraction", a_fraction, "fraction of the admissible amplitude");
    app->add_option("--sigma-mode", sigma_mode, "paper | first-order | exact-f");
    app->add_option("--bump", bump, "mollifier | plateau");
    app->add_option("--c", c, "liquidity feedback c");
    app->add_option("--omega", omega, "memory weight omega");
    app->add_option("--c-min", c_min, "scan: smallest c");
    app->add_option("--c-max", c_max, "scan: largest c");
    app->add_option("--c-steps", c_steps, "scan: number of c values");
    app->add_option("--x0", x0, "initial state");
    app->add_option("--length", length, "orbit length");
    app->add_option("--bins", bins, "histogram bins");
    app->add_option("--cells", cells, "Ulam cells");
    app->add_option("--t", t, "Lyapunov orbit length");
    app->add_option("--count", count, "CLT ensemble size");
    app->add_option("--z", z, "EVT target");
  }

  hetero::ExperimentConfig resolve() const {
    hetero::ExperimentConfig c0 = config.empty() ? hetero::ExperimentConfig{} : hetero::load_config(config);
    if (seed) c0.seed = *seed;
    if (out) c0.out = *out;
    if (experiment) c0.experiment = hetero::experiment_from_string(*experiment);
    if (sigma_mode) c0.sigma_mode = hetero::sigma_mode_from_string(*sigma_mode);
    if (bump) c0.bump = hetero::bump_from_string(*bump);
    if (n) c0.n = *n;
    if (a) c0.a = *a;
    if (a_fraction) c0.a_fraction = *a_fraction;
    if (c) c0.params.c = *c;
    if (omega) c0.params.omega = *omega;
    if (c_min) c0.c_min = *c_min;
    if (c_max) c0.c_max = *c_max;
    if (c_steps) c0.c_steps = *c_steps;
    if (x0) c0.x0 = *x0;
    if (length) c0.length = *length;
    if (bins) c0.bins = *bins;
    if (cells) c0.ulam_cells = *cells;
    if (t) c0.lyapunov_t = *t;
    if (count) c0.clt_count = *count;
    if (z) c0.z = *z;
    return c0;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hetero: leverage-cycle maps with state-dependent noise"};
  app.require_subcommand(1);

  Overrides run_opts, val_opts;
  bool print_config = false;
  auto* run = app.add_subcommand("run", "run one experiment and write its artifacts");
  run_opts.attach(run);
  run->add_flag("--print-config", print_config, "print the resolved config and exit");
  auto* val = app.add_subcommand("validate", "check a config without running it");
  val_opts.attach(val);
  app.add_subcommand("version", "print the version");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("version")) {
      std::cout << "hetero " << hetero::kVersion << "\n";
      return 0;
    }
    if (app.got_subcommand("validate")) {
      const auto cfg = val_opts.resolve();
      const auto rep = hetero::validate(cfg);
      std::cout << rep.text();
      return rep.ok() ? 0 : 2;
    }
    const auto cfg = run_opts.resolve();
    if (print_config) {
      std::cout << hetero::to_config_text(cfg);
      return 0;
    }
    const auto res = hetero::run(cfg);
    for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";
    if (res.exit_code == 0) {
      std::cout << res.message << "\n";
      for (const auto& f : res.files) std::cout << "  " << f.string() << "\n";
      hetero::save_config(cfg, std::filesystem::path(cfg.out) / "config.ini");
    } else {
      std::cerr << "error: " << res.message << "\n";
    }
    return res.exit_code;
  } catch (const hetero::ParameterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const hetero::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
