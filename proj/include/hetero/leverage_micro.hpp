#pragma once

// Slow-fast banking model: within each slow period the bank observes n
// AR(1) returns, estimates (phi, sigma^2) by conditional least squares,
// forms the aggregated variance and updates leverage under a VaR limit.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <vector>

#include "hetero/core_maps.hpp"
#include "hetero/errors.hpp"
#include "hetero/noise_kernel.hpp"
#include "hetero/numerics.hpp"
#include "hetero/orbit_engine.hpp"
#include "hetero/rng.hpp"

namespace hetero {

struct MicroState {
  double lambda = 1.0;
  double phi = 0.0;
  double sigma2_e = 0.0;
  double gamma = 0.0;
};

/// State with scaled leverage phi: lambda = (1 + g0 phi)/(1 - c phi).
inline MicroState micro_state_from_phi(const MapParams& p, double phi) {
  if (!(std::abs(phi) < 1.0)) throw DomainError("micro_state_from_phi: |phi| must be < 1");
  const double den = 1.0 - p.c * phi;
  if (!(den > 0.0)) throw DomainError("micro_state_from_phi: 1 - c phi must be positive");
  MicroState s;
  s.phi = phi;
  s.lambda = (1.0 + p.gamma0 * phi) / den;
  s.gamma = p.gamma0 + p.c * s.lambda;
  s.sigma2_e = p.sigma_eps / ((1.0 - phi) * (1.0 - phi));
  return s;
}

/// r_0, ..., r_n with r_s = phi r_{s-1} + eps_s, eps ~ N(0, sigma_eps2) and r_0 from the stationary law
/// (or the given carry-over value).
inline std::vector<double> simulate_fast_returns(double phi_prev, double sigma_eps2, std::uint64_t n, Stream& rng,
                                                 std::optional<double> r0 = std::nullopt) {
  if (!(std::abs(phi_prev) < 1.0)) throw DomainError("simulate_fast_returns: |phi_prev| must be < 1");
  if (!(sigma_eps2 >= 0.0)) throw ParameterError("simulate_fast_returns: negative innovation variance");
  std::vector<double> r(n + 1);
  const double sd = std::sqrt(sigma_eps2);
  r[0] = r0 ? *r0 : rng.normal() * sd / std::sqrt(1.0 - phi_prev * phi_prev);
  for (std::uint64_t k = 1; k <= n; ++k) r[k] = phi_prev * r[k - 1] + sd * rng.normal();
  return r;
}

struct Ar1Estimate {
  double phi_hat = num::kNaN;
  double sigma2_hat = num::kNaN;
};

/// Conditional maximum likelihood: least squares on lagged pairs, residual variance.
inline Ar1Estimate mle_ar1(const std::vector<double>& r) {
  if (r.size() < 10) throw InsufficientData("mle_ar1: need at least 10 returns");
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 1; k < r.size(); ++k) {
    sxy += r[k] * r[k - 1];
    sxx += r[k - 1] * r[k - 1];
  }
  if (!(sxx > 0.0)) throw DomainError("mle_ar1: degenerate (constant zero) series");
  Ar1Estimate e;
  e.phi_hat = sxy / sxx;
  double res = 0.0;
  for (std::size_t k = 1; k < r.size(); ++k) {
    const double d = r[k] - e.phi_hat * r[k - 1];
    res += d * d;
  }
  e.sigma2_hat = res / static_cast<double>(r.size() - 1);
  return e;
}

/// Variance of the sum of n AR(1) returns:
/// (1 + 2p(1-p^n)/(1-p) - 2((np-n-1)p^{n+1} + p)/(n(1-p)^2)) n s2/(1-p^2).
inline double aggregated_variance(double phi_hat, double sigma2_hat, std::uint64_t n) {
  const double p = phi_hat;
  if (!(std::abs(p) < 1.0)) throw DomainError("aggregated_variance: |phi_hat| must be < 1");
  if (p == 0.0) return static_cast<double>(n) * sigma2_hat;
  const double N = static_cast<double>(n);
  const double pn = std::pow(p, N);
  const double corr = 1.0 + 2.0 * p * (1.0 - pn) / (1.0 - p) -
                      2.0 * ((N * p - N - 1.0) * pn * p + p) / (N * (1.0 - p) * (1.0 - p));
  return corr * N * sigma2_hat / (1.0 - p * p);
}

/// Var(sum r_k) = s2/(1-p^2) (n + 2 sum_{k<n} (n-k) p^k), summed directly.
inline double aggregated_variance_direct(double phi, double sigma2, std::uint64_t n) {
  double s = static_cast<double>(n), pk = 1.0;
  for (std::uint64_t k = 1; k < n; ++k) {
    pk *= phi;
    s += 2.0 * static_cast<double>(n - k) * pk;
  }
  return sigma2 / (1.0 - phi * phi) * s;
}

struct MicroOptions {
  /// Use phi_hat = phi, sigma2_hat = Sigma_eps/n and the large-n aggregated variance
  /// Sigma_eps/(1-phi)^2 (no sampling): the step is then the reduced map.
  bool deterministic = false;
  /// Start each block from the previous block's last return instead of the stationary law.
  bool carry_returns = false;
};

struct MicroStats {
  std::uint64_t steps = 0;
  /// Blocks where phi_hat was clamped into [-1 + 1/n, 1 - 1/n].
  std::uint64_t clamped = 0;
  double last_return = 0.0;
  bool has_last = false;
};

/// One slow period: fast block, estimation, aggregated variance, leverage update.
inline MicroState micro_step(const MicroState& s, const MapParams& p, std::uint64_t n, Stream& rng,
                             const MicroOptions& opt = {}, MicroStats* stats = nullptr) {
  if (n < 10) throw ParameterError("micro_step: n must be at least 10");
  const double N = static_cast<double>(n);
  double sigma2_e;
  if (opt.deterministic) {
    sigma2_e = p.sigma_eps / ((1.0 - s.phi) * (1.0 - s.phi));
  } else {
    std::optional<double> r0;
    if (opt.carry_returns && stats && stats->has_last) r0 = stats->last_return;
    const auto r = simulate_fast_returns(s.phi, p.sigma_eps / N, n, rng, r0);
    auto est = mle_ar1(r);
    const double lim = 1.0 - 1.0 / N;
    if (std::abs(est.phi_hat) > lim) {
      est.phi_hat = std::clamp(est.phi_hat, -lim, lim);
      if (stats) ++stats->clamped;
    }
    sigma2_e = aggregated_variance(est.phi_hat, est.sigma2_hat, n);
    if (stats) {
      stats->last_return = r.back();
      stats->has_last = true;
    }
  }
  MicroState out;
  out.sigma2_e = sigma2_e;
  const double inv = p.omega / (s.lambda * s.lambda) + (1.0 - p.omega) * p.alpha * p.alpha * sigma2_e;
  out.lambda = 1.0 / std::sqrt(inv);
  out.gamma = p.gamma0 + p.c * out.lambda;
  out.phi = (out.lambda - 1.0) / out.gamma;
  if (!(out.lambda > 0.0) || !std::isfinite(out.lambda) || !(out.gamma > 0.0) || !std::isfinite(out.phi) ||
      !(std::abs(out.phi) < 1.0)) {
    std::ostringstream os;
    os << "micro_step: breakdown from lambda=" << s.lambda << " phi=" << s.phi << " sigma2_e=" << s.sigma2_e
       << " gamma=" << s.gamma << " to lambda=" << out.lambda << " phi=" << out.phi << " sigma2_e=" << sigma2_e
       << " gamma=" << out.gamma;
    throw ModelBreakdown(os.str());
  }
  if (stats) ++stats->steps;
  return out;
}

struct MicroRun {
  std::vector<MicroState> states;
  MicroStats stats;
  std::uint64_t n = 0;
  std::uint64_t seed = 0;
};

/// horizon slow periods after burn_in, starting from scaled leverage phi0.
inline MicroRun micro_run(const MapParams& p, std::uint64_t n, std::uint64_t horizon, std::uint64_t seed,
                          double phi0 = 0.38, std::uint64_t burn_in = 200, const MicroOptions& opt = {}) {
  MicroRun run;
  run.n = n;
  run.seed = seed;
  Stream rng(seed);
  MicroState s = micro_state_from_phi(p, phi0);
  run.states.reserve(horizon);
  for (std::uint64_t t = 0; t < burn_in + horizon; ++t) {
    s = micro_step(s, p, n, rng, opt, &run.stats);
    if (t >= burn_in) run.states.push_back(s);
  }
  return run;
}

struct MicroCompareRow {
  std::uint64_t n = 0;
  double ks = num::kNaN;
  double a = 0.0;
  std::uint64_t clamped = 0;
  /// "ok", "small-n" (expansion regime questionable) or the failure message.
  std::string flag = "ok";
};

struct MicroCompareOptions {
  std::uint64_t horizon = 20000;
  std::uint64_t reduced_length = 200000;
  std::uint64_t burn_in = 200;
  double x0 = 0.38;
  std::uint64_t small_n = 10;
};

/// KS distance between the phi-marginal of the micro model and of the reduced chain (paper noise,
/// per-n admissible amplitude) for each n.
inline std::vector<MicroCompareRow> compare_micro_reduced(const MapParams& p, const std::vector<std::uint64_t>& n_list,
                                                          std::uint64_t seed, const MicroCompareOptions& opt = {}) {
  const LeverageMap map(p);
  const MapGeometry geo = find_geometry(map);
  const ExtendedMap ext(map, geo);
  std::vector<MicroCompareRow> rows(n_list.size());
  parallel_for(n_list.size(), [&](std::size_t i) {
    MicroCompareRow& row = rows[i];
    row.n = n_list[i];
    try {
      const double n = static_cast<double>(row.n);
      row.a = admissible_a(map, geo, n).a;
      const auto run = micro_run(p, row.n, opt.horizon, derive_seed(seed, 2 * i), opt.x0, opt.burn_in);
      row.clamped = run.stats.clamped;
      std::vector<double> micro;
      micro.reserve(run.states.size());
      for (const auto& s : run.states) micro.push_back(s.phi);
      const Chain chain(ext, NoiseSpec(row.a, n), OrbitMode::random_paper);
      Walker w(chain, derive_seed(seed, 2 * i + 1), opt.x0);
      w.skip(opt.burn_in);
      std::vector<double> reduced;
      reduced.reserve(opt.reduced_length);
      for (std::uint64_t k = 0; k < opt.reduced_length; ++k) reduced.push_back(w.next());
      row.ks = num::ks_two_sample(std::move(micro), std::move(reduced));
      if (row.n <= opt.small_n) row.flag = "small-n";
    } catch (const Error& e) {
      row.flag = e.what();
    }
  });
  return rows;
}

}  // namespace hetero
