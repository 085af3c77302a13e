#pragma once

// Config validation and the experiment drivers behind `hetero run`: each
// writes CSV/JSON artifacts with a metadata header plus a gnuplot script.

#include <cmath>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hetero/core_maps.hpp"
#include "hetero/errors.hpp"
#include "hetero/extremes.hpp"
#include "hetero/io.hpp"
#include "hetero/leverage_micro.hpp"
#include "hetero/limit_stats.hpp"
#include "hetero/lyapunov.hpp"
#include "hetero/multifractal.hpp"
#include "hetero/noise_kernel.hpp"
#include "hetero/orbit_engine.hpp"
#include "hetero/transfer_operator.hpp"

namespace hetero {

struct ValidationCheck {
  std::string name;
  bool ok = true;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  bool ok() const {
    for (const auto& c : checks)
      if (!c.ok) return false;
    return true;
  }
  std::string text() const {
    std::ostringstream os;
    for (const auto& c : checks) os << (c.ok ? "[ok]   " : "[FAIL] ") << c.name << ": " << c.detail << "\n";
    os << (ok() ? "all checks passed" : "validation failed") << "\n";
    return os.str();
  }
};

namespace detail {
inline std::string num_str(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}
}  // namespace detail

/// Side-effect-free checks: parameters, geometry, admissible amplitude, noise channel, EVT target.
inline ValidationReport validate(const ExperimentConfig& cfg) {
  using detail::num_str;
  ValidationReport rep;
  auto add = [&](std::string name, bool ok, std::string detail) {
    rep.checks.push_back({std::move(name), ok, std::move(detail)});
  };
  try {
    cfg.params.validate();
    add("parameters", true, "gamma0, alpha, sigma_eps, omega, c in range");
  } catch (const Error& e) {
    add("parameters", false, e.what());
    return rep;
  }
  const LeverageMap map(cfg.params);
  const double sbar = map.sbar();
  add("variance channel", sbar > 0.0,
      sbar > 0.0 ? "Sigma_bar = " + num_str(sbar)
                 : "Sigma_bar = 0 (omega = 1): the noise-free variance channel is degenerate");
  MapGeometry geo;
  try {
    geo = find_geometry(map);
    add("geometry", true,
        "crit = " + num_str(geo.crit) + ", Delta = " + num_str(geo.delta) + ", b = " + num_str(geo.b) +
            ", Gamma = " + num_str(geo.gamma_gap));
  } catch (const GeometryError& e) {
    add("geometry", false, e.what());
    return rep;
  }
  add("Delta < b < 1", geo.delta < geo.b && geo.b < 1.0, num_str(geo.delta) + " < " + num_str(geo.b) + " < 1");
  add("core ordering", geo.core_ordered,
      "T(Delta) = " + num_str(geo.core_lo) + (geo.core_ordered ? " < " : " >= ") + "crit = " + num_str(geo.crit));
  if (!(cfg.n > 0.0)) {
    add("noise", false, "n must be positive");
    return rep;
  }
  try {
    const AdmissibleBound bound = admissible_a(map, geo, cfg.n, cfg.sigma_mode);
    const double a = cfg.a > 0.0 ? cfg.a : cfg.a_fraction * bound.a;
    const bool ok = a > 0.0 && a <= bound.a;
    add("admissible amplitude", ok,
        "a = " + num_str(a) + ", bound = " + num_str(bound.a) + " at n = " + num_str(cfg.n) + " (sigma_max " +
            num_str(bound.sigma_max) + " at phi = " + num_str(bound.argmax) + ")");
  } catch (const Error& e) {
    add("admissible amplitude", false, e.what());
  }
  if (cfg.experiment == ExperimentKind::evt) {
    const bool in_core = cfg.z >= geo.core_lo && cfg.z <= geo.core_hi;
    add("EVT target in core", in_core,
        "z = " + num_str(cfg.z) + ", core = [" + num_str(geo.core_lo) + ", " + num_str(geo.core_hi) + "]");
    if (in_core && rep.ok()) {
      try {
        const AdmissibleBound bound = admissible_a(map, geo, cfg.n, cfg.sigma_mode);
        const double a = cfg.a > 0.0 ? cfg.a : cfg.a_fraction * bound.a;
        const ExtendedMap ext(map, geo);
        const auto op = build_ulam(ext, NoiseSpec(a, cfg.n, cfg.bump), 512, cfg.sigma_mode);
        const auto st = stationary_density(op, 1e-10, 100000, 0);
        const auto i = static_cast<std::size_t>((cfg.z - op.lo()) / op.width());
        double mn = INFINITY;
        for (std::size_t k = i > 0 ? i - 1 : 0; k <= std::min(i + 1, op.size() - 1); ++k)
          mn = std::min(mn, st.density.density(k));
        add("density positive near target", mn > 0.0, "min density on 3 cells around z = " + num_str(mn));
      } catch (const Error& e) {
        add("density positive near target", false, e.what());
      }
    }
  }
  return rep;
}

struct RunResult {
  int exit_code = 0;
  std::vector<std::filesystem::path> files;
  std::string message;
  std::vector<std::string> warnings;
};

namespace detail {

struct Setup {
  LeverageMap map;
  MapGeometry geo;
  ExtendedMap ext;
  double a;
  NoiseSpec spec;
  Chain chain;
};

inline Setup setup(const ExperimentConfig& cfg) {
  LeverageMap map(cfg.params);
  MapGeometry geo = find_geometry(map);
  ExtendedMap ext(map, geo);
  const double a = cfg.a > 0.0 ? cfg.a : cfg.a_fraction * admissible_a(map, geo, cfg.n, cfg.sigma_mode).a;
  NoiseSpec spec = make_admissible_spec(map, geo, a, cfg.n, cfg.bump, cfg.sigma_mode);
  Chain chain(ext, spec, orbit_mode_of(cfg.sigma_mode));
  return Setup{map, geo, ext, a, spec, chain};
}

inline std::string gp_header(const std::string& png, const std::string& title) {
  return "set datafile separator ','\nset datafile commentschars '#'\nset key autotitle columnhead\n"
         "set terminal pngcairo size 900,600\nset output '" +
         png + "'\nset title '" + title + "'\n";
}

class Artifacts {
 public:
  Artifacts(const ExperimentConfig& cfg, RunResult& res) : cfg_(cfg), res_(res), dir_(cfg.out) {
    std::filesystem::create_directories(dir_);
  }

  CsvWriter csv(const std::string& name, const std::vector<std::string>& cols) {
    res_.files.push_back(dir_ / name);
    return CsvWriter(dir_ / name, cols, metadata_block(cfg_, name));
  }

  void text(const std::string& name, const std::string& body, bool with_meta = true) {
    res_.files.push_back(dir_ / name);
    write_text(dir_ / name, (with_meta ? metadata_block(cfg_, name) : std::string()) + body);
  }

  void warn(std::string w) { res_.warnings.push_back(std::move(w)); }

  void json(const std::string& name, nlohmann::ordered_json j) {
    j["metadata"] = {{"version", kVersion}, {"config_hash", config_hash(cfg_)}, {"seed", cfg_.seed},
                     {"config", to_config_text(cfg_)}};
    res_.files.push_back(dir_ / name);
    write_text(dir_ / name, j.dump(2) + "\n");
  }

 private:
  const ExperimentConfig& cfg_;
  RunResult& res_;
  std::filesystem::path dir_;
};

inline void run_orbit(const ExperimentConfig& cfg, Artifacts& art) {
  const Setup s = setup(cfg);
  const Trajectory tr = random_orbit(s.chain, cfg.x0, cfg.length, cfg.seed);
  {
    auto w = art.csv("trajectory.csv", {"t", "phi"});
    for (std::size_t t = 0; t < tr.states.size(); ++t) w.row(static_cast<std::uint64_t>(t), tr.states[t]);
  }
  const DensityEstimate d =
      empirical_density(tr.states, cfg.bins, std::min<std::size_t>(cfg.burn_in, tr.states.size() - cfg.bins),
                        s.geo.support_lo, s.geo.support_hi);
  {
    auto w = art.csv("density.csv", {"bin_lo", "bin_hi", "mass"});
    for (std::size_t i = 0; i < d.bins(); ++i) w.row(d.edge(i), d.edge(i) + d.width(), d.masses[i]);
  }
  {
    auto w = art.csv("map.csv", {"phi", "T"});
    for (int i = 0; i <= 2000; ++i) {
      const double x = s.geo.domain_lo + (s.geo.domain_hi - s.geo.domain_lo) * i / 2000.0;
      w.row(x, s.ext.T(x));
    }
  }
  art.text("orbit.gp", gp_header("orbit.png", "map, diagonal and stationary histogram") +
                           "set multiplot layout 1,2\nplot 'map.csv' using 1:2 with lines, x with lines dt 2 title "
                           "'diagonal'\nplot 'density.csv' using (($1+$2)/2):($3/($2-$1)) with steps title "
                           "'density'\nunset multiplot\n");
}

inline void run_stationary(const ExperimentConfig& cfg, Artifacts& art) {
  const Setup s = setup(cfg);
  const UlamOperator op = build_ulam(s.ext, s.spec, cfg.ulam_cells, cfg.sigma_mode);
  const StationaryResult st = stationary_density(op, 1e-12, 100000, 5, cfg.seed);
  const SpectralGap gap = spectral_gap(op, st.density.masses, 20000, 1e-7, cfg.seed);
  {
    auto w = art.csv("density.csv", {"bin_lo", "bin_hi", "mass"});
    const auto& d = st.density;
    for (std::size_t i = 0; i < d.bins(); ++i) w.row(d.edge(i), d.edge(i) + d.width(), d.masses[i]);
  }
  {
    auto w = art.csv("operator.csv", {"row", "col", "value"});
    for (std::size_t i = 0; i < op.size(); ++i) {
      const auto& r = op.row(i);
      for (std::size_t k = 0; k < r.values.size(); ++k)
        if (r.values[k] != 0.0) w.row(static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(r.first + k), r.values[k]);
    }
  }
  nlohmann::ordered_json j;
  j["cells"] = op.size();
  j["iterations"] = st.iterations;
  j["residual"] = st.residual;
  j["restart_max_l1"] = st.restart_max_l1;
  j["unique"] = st.unique;
  j["max_row_defect"] = op.max_defect();
  j["lambda1"] = gap.lambda1;
  j["lambda2_abs"] = gap.lambda2_abs;
  j["gap"] = gap.gap;
  j["gap_converged"] = gap.converged;
  j["a"] = s.a;
  art.json("stationary.json", j);
  art.text("stationary.gp", gp_header("stationary.png", "stationary density (Ulam)") +
                                "plot 'density.csv' using (($1+$2)/2):($3/($2-$1)) with steps title 'h'\n");
}

inline std::vector<double> c_grid(const ExperimentConfig& cfg) {
  if (cfg.c_steps < 1) throw ParameterError("scan.c_steps must be >= 1");
  std::vector<double> g(cfg.c_steps);
  for (std::size_t i = 0; i < g.size(); ++i)
    g[i] = cfg.c_steps == 1 ? cfg.c_min
                            : cfg.c_min + (cfg.c_max - cfg.c_min) * static_cast<double>(i) /
                                              static_cast<double>(cfg.c_steps - 1);
  return g;
}

inline void run_lyapunov(const ExperimentConfig& cfg, Artifacts& art) {
  ScanOptions opt;
  opt.t = cfg.lyapunov_t;
  opt.burn_in = cfg.burn_in;
  opt.x0 = cfg.x0;
  opt.a_fraction = cfg.a_fraction;
  const auto rows = lyapunov_scan(c_grid(cfg), cfg.n_list, cfg.params, cfg.seed, opt);
  {
    auto w = art.csv("lyapunov.csv", {"c", "n", "lambda", "stderr", "flag"});
    for (const auto& r : rows) w.row(r.c, r.n, r.lambda, r.std_error, r.flag);
  }
  std::ostringstream gp;
  gp << gp_header("lyapunov.png", "Lyapunov exponent against c (n = 0: deterministic)")
     << "set xlabel 'c'\nset ylabel 'lambda'\nset yzeroaxis\nplot";
  std::vector<double> ns = {0.0};
  ns.insert(ns.end(), cfg.n_list.begin(), cfg.n_list.end());
  for (std::size_t k = 0; k < ns.size(); ++k)
    gp << (k ? ", \\\n    " : " ") << "'lyapunov.csv' using 1:($2==" << fmt(ns[k]) << " ? $3 : 1/0) with lines title 'n = "
       << fmt(ns[k]) << "'";
  gp << "\n";
  art.text("lyapunov.gp", gp.str());
}

inline void run_bifurcation(const ExperimentConfig& cfg, Artifacts& art) {
  const auto bd = bifurcation_diagram(c_grid(cfg), cfg.params, cfg.transient, cfg.keep, cfg.x0);
  {
    auto w = art.csv("bifurcation.csv", {"c", "phi"});
    for (const auto& [c, p] : bd.points) w.row(c, p);
  }
  {
    const auto g = c_grid(cfg);
    auto w = art.csv("bifurcation_flags.csv", {"c", "flag"});
    for (std::size_t i = 0; i < g.size(); ++i) w.row(g[i], bd.flags[i]);
  }
  art.text("bifurcation.gp", gp_header("bifurcation.png", "bifurcation diagram") +
                                 "set xlabel 'c'\nset ylabel 'phi'\nplot 'bifurcation.csv' using 1:2 with dots "
                                 "notitle\n");
}

inline void run_clt(const ExperimentConfig& cfg, Artifacts& art) {
  const Setup s = setup(cfg);
  const UlamOperator op = build_ulam(s.ext, s.spec, cfg.ulam_cells, cfg.sigma_mode);
  const StationaryResult st = stationary_density(op, 1e-12, 100000, 0, cfg.seed);
  const Observable g =
      cfg.clt_center_cells > op.size()
          ? make_observable_g(
                stationary_density(build_ulam(s.ext, s.spec, cfg.clt_center_cells, cfg.sigma_mode), 1e-12, 100000, 0,
                                   cfg.seed)
                    .density)
          : make_observable_g(st.density);
  const auto gc = op.cell_average([&](double x) { return g(x); });
  const IotaResult io = iota_squared(op, st.density.masses, gc);
  const auto samples = birkhoff_ensemble(s.chain, g, cfg.clt_t, cfg.clt_count, cfg.seed, cfg.x0, cfg.burn_in, g.id, g.m);
  nlohmann::ordered_json j;
  j["observable"] = g.id;
  j["centering"] = g.m;
  j["iota2"] = io.iota2;
  j["count"] = cfg.clt_count;
  j["rows"] = nlohmann::ordered_json::array();
  {
    auto w = art.csv("clt_samples.csv", {"t", "value"});
    for (const auto& sm : samples)
      for (double v : sm.values) w.row(sm.t, v);
  }
  for (const auto& sm : samples) {
    nlohmann::ordered_json r;
    r["t"] = sm.t;
    r["variance"] = num::variance(sm.values);
    if (sm.values.size() >= 100) {
      const auto nb = normality_battery(sm.values, derive_seed(cfg.seed, sm.t));
      r["shapiro_wilk"] = {{"stat", nb.shapiro.statistic}, {"p", nb.shapiro.p_value}};
      r["dagostino_k2"] = {{"stat", nb.dagostino.statistic}, {"p", nb.dagostino.p_value}};
      r["jarque_bera"] = {{"stat", nb.jarque_bera.statistic}, {"p", nb.jarque_bera.p_value}};
    }
    if (io.iota2 > 0.0) r["berry_esseen"] = berry_esseen_distance(sm.values, std::sqrt(io.iota2));
    j["rows"].push_back(r);
  }
  art.json("clt.json", j);
  {
    auto w = art.csv("ldp.csv", {"eps", "t", "loghat"});
    try {
      for (const auto& c : ldp_decay(samples, cfg.ldp_eps)) w.row(c.eps, c.t, c.loghat);
    } catch (const InsufficientData&) {
      // every cell censored: the header-only file records it
    }
  }
  art.text("clt.gp", gp_header("clt.png", "S_t/sqrt(t) against the limiting normal law") +
                         "iota2 = " + fmt(io.iota2) +
                         "\nbinwidth = 4*sqrt(iota2)/40\nbin(x) = binwidth*floor(x/binwidth)\n"
                         "plot 'clt_samples.csv' using (bin($2)):(1.0/(" +
                         fmt(static_cast<std::uint64_t>(cfg.clt_count)) +
                         "*binwidth)) smooth freq with boxes title 'largest t (overlaid)', \\\n"
                         "    exp(-x*x/(2*iota2))/sqrt(2*pi*iota2) title 'N(0, iota^2)'\n");
}

inline void run_dq(const ExperimentConfig& cfg, Artifacts& art) {
  const Setup s = setup(cfg);
  auto r = radii_grid(cfg.r_min, cfg.r_max, cfg.r_count);
  // boxes of a few 1e-6 are nearly empty below 10^7 samples
  if (cfg.length < 10000000 && cfg.r_min < 1e-4) {
    r = radii_grid(1e-4, 1e-3, cfg.r_count);
    art.warn("dq: " + std::to_string(cfg.length) + " samples is below 10^7; radii widened to [1e-4, 1e-3]");
  }
  const DqSpectrum sp = dq_spectrum_streamed(s.chain, cfg.x0, cfg.burn_in, cfg.length, cfg.seed, cfg.q_list, r);
  {
    auto w = art.csv("dq.csv", {"q", "Dq", "R2", "n_radii"});
    for (std::size_t i = 0; i < sp.q.size(); ++i)
      w.row(sp.q[i], sp.D[i], sp.r2[i], static_cast<std::uint64_t>(sp.n_radii[i]));
  }
  {
    auto w = art.csv("dq_reference.csv", {"q", "Dq"});
    for (int i = 0; i <= 100; ++i) {
      const double q = -5.0 + 0.1 * i;
      w.row(q, dq_reference(q));
    }
  }
  art.text("dq.gp", gp_header("dq.png", "generalised dimensions") +
                        "set xlabel 'q'\nset ylabel 'D(q)'\nplot 'dq.csv' using 1:2 with linespoints title 'chain', "
                        "\\\n    'dq_reference.csv' using 1:2 with lines title 'reference'\n");
}

inline void run_evt(const ExperimentConfig& cfg, Artifacts& art) {
  const Setup s = setup(cfg);
  EvtConfig ec;
  ec.z = cfg.z;
  ec.tau = cfg.tau;
  ec.t_grid = cfg.evt_t;
  ec.x0 = cfg.x0;
  ec.burn_in = cfg.burn_in;
  ec.seed = cfg.seed;
  ec.validate(s.geo);
  auto ts = ec.t_grid;
  std::sort(ts.begin(), ts.end());
  // smallest radius from a coarse density near z, then a fine density with width < r_min/10
  const DensityEstimate coarse = evt_density(s.chain, ec, cfg.evt_density_length / 10, 1000, derive_seed(cfg.seed, 1));
  const double dens = coarse.density(std::min(coarse.bins() - 1, static_cast<std::size_t>((ec.z - coarse.lo) / coarse.width())));
  const double r_min = ec.tau / static_cast<double>(ts.back()) / (2.0 * std::max(dens, 1e-12));
  const std::size_t bins = required_bins(coarse.lo, coarse.hi, r_min);
  const DensityEstimate mu = evt_density(s.chain, ec, cfg.evt_density_length, bins, derive_seed(cfg.seed, 2));
  const auto levels = boundary_levels(ec, mu);
  const auto orbit = stationary_orbit(s.chain, ec.x0, ec.burn_in, cfg.evt_orbit_length, derive_seed(cfg.seed, 3));
  const auto bm = block_maxima_prob(ec, levels, orbit);
  const auto ei = extremal_index(ec, levels, orbit);
  const auto pc = poisson_counts(ec, levels.back(), cfg.poisson_s, orbit);
  {
    auto w = art.csv("evt.csv", {"t", "u_t", "p_hat", "stderr"});
    for (const auto& b : bm) w.row(b.t, b.u, b.p_hat, b.std_error);
  }
  {
    auto w = art.csv("extremal_index.csv", {"t", "radius", "mass", "visits", "theta"});
    for (std::size_t i = 0; i < ei.size(); ++i)
      w.row(ei[i].t, levels[i].radius, levels[i].mass, ei[i].visits, ei[i].theta);
  }
  {
    auto w = art.csv("poisson.csv", {"s", "k", "p_hat", "poisson_pmf"});
    for (const auto& p : pc)
      for (std::size_t k = 0; k < p.p_hat.size(); ++k) w.row(p.s, static_cast<std::uint64_t>(k), p.p_hat[k], p.pmf[k]);
  }
  art.text("evt.gp", gp_header("evt.png", "boundary levels and block maxima") +
                         "set multiplot layout 2,1\nset logscale x\nset xlabel 't'\n"
                         "plot 'evt.csv' using 1:2 with linespoints title 'u_t'\n"
                         "plot 'evt.csv' using 1:3:4 with yerrorbars title 'P(M_t <= u_t)', " +
                         fmt(std::exp(-ec.tau)) + " title 'exp(-tau)'\nunset multiplot\n");
}

inline void run_micro(const ExperimentConfig& cfg, Artifacts& art) {
  MicroCompareOptions opt;
  opt.horizon = cfg.micro_horizon;
  opt.reduced_length = cfg.reduced_length;
  opt.burn_in = cfg.burn_in > 200 ? 200 : cfg.burn_in;
  opt.x0 = cfg.x0;
  const auto rows = compare_micro_reduced(cfg.params, cfg.micro_n, cfg.seed, opt);
  {
    auto w = art.csv("micro_compare.csv", {"n", "ks", "a", "clamped", "flag"});
    for (const auto& r : rows) w.row(r.n, r.ks, r.a, r.clamped, r.flag);
  }
  for (std::size_t i = 0; i < cfg.micro_n.size(); ++i) {
    const std::uint64_t n = cfg.micro_n[i];
    auto w = art.csv("micro_n" + std::to_string(n) + ".csv", {"t", "lambda", "phi", "sigma2_e", "gamma"});
    Stream rng(derive_seed(cfg.seed, 2 * i));
    MicroState st = micro_state_from_phi(cfg.params, cfg.x0);
    MicroStats stats;
    for (std::uint64_t t = 0; t < std::min<std::uint64_t>(cfg.micro_horizon, 5000); ++t) {
      try {
        st = micro_step(st, cfg.params, n, rng, {}, &stats);
      } catch (const ModelBreakdown&) {
        break;  // the truncated run documents the breakdown time
      }
      w.row(t + 1, st.lambda, st.phi, st.sigma2_e, st.gamma);
    }
  }
  art.text("micro.gp", gp_header("micro.png", "micro model against the reduced chain") +
                           "set logscale x\nset xlabel 'n'\nset ylabel 'KS distance'\n"
                           "plot 'micro_compare.csv' using 1:2 with linespoints title 'KS'\n");
}

}  // namespace detail

/// Runs one experiment; exit code 0 success, 2 validation failure, 3 numeric breakdown.
inline RunResult run(const ExperimentConfig& cfg) {
  RunResult res;
  const bool needs_noise = cfg.experiment != ExperimentKind::bifurcation && cfg.experiment != ExperimentKind::lyapunov &&
                           cfg.experiment != ExperimentKind::micro_compare;
  if (needs_noise) {
    const ValidationReport rep = validate(cfg);
    if (!rep.ok()) {
      res.exit_code = 2;
      res.message = rep.text();
      return res;
    }
  } else {
    try {
      cfg.params.validate();
    } catch (const Error& e) {
      res.exit_code = 2;
      res.message = e.what();
      return res;
    }
  }
  try {
    detail::Artifacts art(cfg, res);
    switch (cfg.experiment) {
      case ExperimentKind::orbit: detail::run_orbit(cfg, art); break;
      case ExperimentKind::stationary: detail::run_stationary(cfg, art); break;
      case ExperimentKind::lyapunov: detail::run_lyapunov(cfg, art); break;
      case ExperimentKind::bifurcation: detail::run_bifurcation(cfg, art); break;
      case ExperimentKind::clt: detail::run_clt(cfg, art); break;
      case ExperimentKind::dq: detail::run_dq(cfg, art); break;
      case ExperimentKind::evt: detail::run_evt(cfg, art); break;
      case ExperimentKind::micro_compare: detail::run_micro(cfg, art); break;
    }
    res.message = std::string(to_string(cfg.experiment)) + ": wrote " + std::to_string(res.files.size()) + " files";
  } catch (const ParameterError& e) {
    res.exit_code = 2;
    res.message = e.what();
  } catch (const GeometryError& e) {
    res.exit_code = 2;
    res.message = e.what();
  } catch (const Error& e) {
    res.exit_code = 3;
    res.message = e.what();
  } catch (const std::filesystem::filesystem_error& e) {
    res.exit_code = 3;
    res.message = e.what();
  }
  return res;
}

}  // namespace hetero
