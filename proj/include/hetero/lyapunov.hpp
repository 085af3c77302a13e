#pragma once

// Lyapunov exponents (deterministic indicator and average exponent of the
// chain), c-scans and bifurcation diagrams.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "hetero/core_maps.hpp"
#include "hetero/noise_kernel.hpp"
#include "hetero/numerics.hpp"
#include "hetero/orbit_engine.hpp"
#include "hetero/transfer_operator.hpp"

namespace hetero {

struct LyapunovResult {
  double estimate = num::kNaN;
  double std_error = num::kNaN;
  std::uint64_t length = 0;
  std::uint64_t burn_in = 0;
  /// Samples with |T'| < 1e-300, left out of the average.
  std::uint64_t excluded = 0;
  /// States within 1e-14 of the critical point.
  std::uint64_t critical_hits = 0;
  OrbitMode mode = OrbitMode::deterministic;
  MapParams params;
  double a = 0.0;
  double n = 0.0;
};

namespace detail {

/// Birkhoff average of log|T'| with 100-batch standard error.
template <class Next, class Deriv>
LyapunovResult birkhoff_log_derivative(Next&& next, Deriv&& deriv, double x0, std::uint64_t t, std::uint64_t burn_in,
                                       double crit) {
  constexpr std::uint64_t kBatches = 100;
  if (t < kBatches) throw InsufficientData("lyapunov: need at least 100 samples");
  LyapunovResult r;
  r.length = t;
  r.burn_in = burn_in;
  double phi = x0;
  for (std::uint64_t i = 0; i < burn_in; ++i) phi = next(phi);
  const std::uint64_t per = t / kBatches;
  std::vector<double> batch(kBatches, 0.0);
  std::vector<std::uint64_t> used(kBatches, 0);
  double total = 0.0;
  std::uint64_t kept = 0;
  for (std::uint64_t i = 0; i < t; ++i) {
    if (std::abs(phi - crit) < 1e-14) ++r.critical_hits;
    const double d = std::abs(deriv(phi));
    if (d < 1e-300) {
      ++r.excluded;
    } else {
      const double l = std::log(d);
      const std::uint64_t b = std::min(i / per, kBatches - 1);
      batch[b] += l;
      ++used[b];
      total += l;
      ++kept;
    }
    phi = next(phi);
  }
  if (kept == 0) throw InsufficientData("lyapunov: every sample excluded");
  r.estimate = total / static_cast<double>(kept);
  std::vector<double> means;
  for (std::uint64_t b = 0; b < kBatches; ++b)
    if (used[b] > 0) means.push_back(batch[b] / static_cast<double>(used[b]));
  r.std_error = means.size() >= 2 ? std::sqrt(num::variance(means) / static_cast<double>(means.size())) : num::kNaN;
  return r;
}

}  // namespace detail

/// Finite-t Lyapunov indicator (1/t) sum log|T'(T^k x0)| along the unclipped deterministic orbit.
inline LyapunovResult deterministic_lyapunov(const LeverageMap& map, double x0, std::uint64_t t,
                                             std::uint64_t burn_in = 1000, double crit = num::kNaN) {
  auto r = detail::birkhoff_log_derivative([&](double p) { return map.T(p); },
                                           [&](double p) { return map.T_prime(p); }, x0, t, burn_in, crit);
  r.params = map.params();
  return r;
}

/// Indicator over a grid of starting points.
inline std::vector<LyapunovResult> lyapunov_indicator(const LeverageMap& map, const std::vector<double>& x0_grid,
                                                      std::uint64_t t, std::uint64_t burn_in = 1000) {
  std::vector<LyapunovResult> out(x0_grid.size());
  parallel_for(x0_grid.size(), [&](std::size_t i) { out[i] = deterministic_lyapunov(map, x0_grid[i], t, burn_in); });
  return out;
}

/// Time average of log|T'(phi_t)| along one orbit of the chain.
inline LyapunovResult average_lyapunov(const Chain& chain, std::uint64_t t, std::uint64_t seed, double x0 = 0.38,
                                       std::uint64_t burn_in = 1000) {
  Walker w(chain, seed, x0);
  const ExtendedMap& ext = chain.ext();
  auto r = detail::birkhoff_log_derivative(
      [&](double) { return w.next(); },
      [&](double p) { return p == 0.0 ? 0.0 : ext.T_prime(p); }, x0, t, burn_in, chain.geometry().crit);
  r.mode = chain.mode();
  r.params = chain.map().params();
  if (chain.spec()) {
    r.a = chain.spec()->a();
    r.n = chain.spec()->n();
  }
  return r;
}

/// int log|T'| dmu_n with the Ulam stationary density (cell averages by Gauss-Legendre).
inline double lyapunov_from_density(const UlamOperator& op, const std::vector<double>& h, const ExtendedMap& ext) {
  const auto lg = op.cell_average([&](double x) { return std::log(std::abs(ext.T_prime(x))); });
  double s = 0.0;
  for (std::size_t j = 0; j < h.size(); ++j) s += h[j] * lg[j];
  return s;
}

struct ScanRow {
  double c = 0.0;
  /// 0 marks the deterministic row.
  double n = 0.0;
  double lambda = num::kNaN;
  double std_error = num::kNaN;
  double a = 0.0;
  std::string flag = "ok";
};

struct ScanOptions {
  std::uint64_t t = 1000000;
  std::uint64_t burn_in = 1000;
  double x0 = 0.38;
  /// Noise amplitude as a fraction of the bound admissible at the smallest n (fixed across n).
  double a_fraction = 1.0;
};

inline const char* to_string(GeometryError::Check c) {
  switch (c) {
    case GeometryError::Check::not_unimodal: return "not-unimodal";
    case GeometryError::Check::no_zero_crossing: return "no-zero-crossing";
    case GeometryError::Check::delta_not_below_b: return "delta-not-below-b";
    case GeometryError::Check::b_not_below_one: return "b-not-below-one";
    case GeometryError::Check::core_ordering: return "core-ordering";
  }
  return "?";
}

/// (c, n) table of Lyapunov estimates; the deterministic row uses the unclipped map,
/// noisy rows need a valid geometry and record it as a gap otherwise.
inline std::vector<ScanRow> lyapunov_scan(const std::vector<double>& c_grid, const std::vector<double>& n_list,
                                          const MapParams& base, std::uint64_t seed, const ScanOptions& opt = {}) {
  const std::size_t per = 1 + n_list.size();
  std::vector<ScanRow> rows(c_grid.size() * per);
  const double n_min = n_list.empty() ? 1.0 : *std::min_element(n_list.begin(), n_list.end());
  parallel_for(c_grid.size(), [&](std::size_t ci) {
    MapParams p = base;
    p.c = c_grid[ci];
    const LeverageMap map(p);
    ScanRow& det = rows[ci * per];
    det.c = p.c;
    std::optional<MapGeometry> geo;
    std::string gflag = "ok";
    try {
      geo = find_geometry(map);
      if (!geo->core_ordered) gflag = "core-unordered";
    } catch (const GeometryError& e) {
      gflag = std::string("geometry:") + to_string(e.check());
    }
    try {
      const auto r = deterministic_lyapunov(map, opt.x0, opt.t, opt.burn_in, geo ? geo->crit : num::kNaN);
      det.lambda = r.estimate;
      det.std_error = r.std_error;
      det.flag = std::isfinite(r.estimate) ? gflag : "diverged";
    } catch (const Error& e) {
      det.flag = "diverged";
    }
    double a = 0.0;
    if (geo) {
      try {
        a = opt.a_fraction * admissible_a(map, *geo, n_min).a;
      } catch (const Error&) {
        geo.reset();
        gflag = "geometry:degenerate-bound";
      }
    }
    for (std::size_t k = 0; k < n_list.size(); ++k) {
      ScanRow& row = rows[ci * per + 1 + k];
      row.c = p.c;
      row.n = n_list[k];
      if (!geo) {
        row.flag = gflag;
        continue;
      }
      row.a = a;
      try {
        const Chain chain(ExtendedMap(map, *geo), NoiseSpec(a, n_list[k]), OrbitMode::random_paper);
        const auto r = average_lyapunov(chain, opt.t, derive_seed(seed, ci * per + 1 + k), opt.x0, opt.burn_in);
        row.lambda = r.estimate;
        row.std_error = r.std_error;
        row.flag = gflag;
      } catch (const DomainEscape&) {
        row.flag = "escape";
      } catch (const Error&) {
        row.flag = "failed";
      }
    }
  });
  return rows;
}

/// Total variation of a scan row sequence (consecutive finite values only).
inline double total_variation(const std::vector<double>& v) {
  double tv = 0.0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (std::isfinite(v[i]) && std::isfinite(v[i - 1])) tv += std::abs(v[i] - v[i - 1]);
  return tv;
}

struct BifurcationDiagram {
  std::vector<std::pair<double, double>> points;
  /// Per grid value: "ok", "core-unordered", "geometry:<check>" or "diverged".
  std::vector<std::string> flags;
};

/// Asymptotic states of the unclipped deterministic map for each c.
inline BifurcationDiagram bifurcation_diagram(const std::vector<double>& c_grid, const MapParams& base,
                                              std::size_t transient = 1000, std::size_t keep = 1000,
                                              double x0 = 0.38) {
  std::vector<std::vector<double>> cloud(c_grid.size());
  BifurcationDiagram out;
  out.flags.assign(c_grid.size(), "ok");
  parallel_for(c_grid.size(), [&](std::size_t ci) {
    MapParams p = base;
    p.c = c_grid[ci];
    const LeverageMap map(p);
    try {
      const MapGeometry g = find_geometry(map);
      if (!g.core_ordered) out.flags[ci] = "core-unordered";
    } catch (const GeometryError& e) {
      out.flags[ci] = std::string("geometry:") + to_string(e.check());
    }
    try {
      double phi = x0;
      for (std::size_t i = 0; i < transient; ++i) phi = map.T(phi);
      for (std::size_t i = 0; i < keep; ++i) {
        if (!std::isfinite(phi)) throw DomainError("non-finite state");
        cloud[ci].push_back(phi);
        phi = map.T(phi);
      }
    } catch (const Error&) {
      cloud[ci].clear();
      out.flags[ci] = "diverged";
    }
  });
  for (std::size_t ci = 0; ci < c_grid.size(); ++ci)
    for (double v : cloud[ci]) out.points.emplace_back(c_grid[ci], v);
  return out;
}

/// Sorted cluster representatives: values closer than tol merge.
inline std::vector<double> distinct_values(std::vector<double> v, double tol) {
  std::sort(v.begin(), v.end());
  std::vector<double> out;
  for (double x : v)
    if (out.empty() || x - out.back() > tol) out.push_back(x);
  return out;
}

}  // namespace hetero
