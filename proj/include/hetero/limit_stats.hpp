#pragma once

// Birkhoff sums of an observable along ensembles of the chain, the
// Green-Kubo variance, normality tests, Berry-Esseen distances and an
// empirical large-deviation table.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "hetero/density.hpp"
#include "hetero/errors.hpp"
#include "hetero/numerics.hpp"
#include "hetero/orbit_engine.hpp"
#include "hetero/rng.hpp"
#include "hetero/transfer_operator.hpp"

namespace hetero {

/// g(x) = sin(x) - m.
struct Observable {
  double m = 0.0;
  std::string id = "sin-centered";
  double operator()(double x) const { return std::sin(x) - m; }
};

/// Centres sin under the supplied density (piecewise constant inside each bin).
inline Observable make_observable_g(const DensityEstimate& mu) {
  Observable g;
  const double w = mu.width();
  double m = 0.0;
  for (std::size_t i = 0; i < mu.bins(); ++i) {
    const double a = mu.edge(i);
    m += mu.masses[i] * (std::cos(a) - std::cos(a + w)) / w;
  }
  g.m = m / mu.total();
  g.id = "sin-centered-mu";
  return g;
}

/// Lebesgue-centred variant: m = average of sin over [lo, hi].
inline Observable make_observable_g_lebesgue(double lo, double hi) {
  Observable g;
  g.m = (std::cos(lo) - std::cos(hi)) / (hi - lo);
  g.id = "sin-centered-lebesgue";
  return g;
}

struct CltSample {
  std::vector<double> values;  // S_t / sqrt(t)
  std::uint64_t t = 0;
  std::string observable;
  double centering = 0.0;
};

/// S_t/sqrt(t) for each t in t_list over count orbits; orbit i uses seed derive_seed(seed, i).
template <class G>
std::vector<CltSample> birkhoff_ensemble(const Chain& chain, const G& g, std::vector<std::uint64_t> t_list,
                                         std::size_t count, std::uint64_t seed, double x0 = 0.38,
                                         std::uint64_t burn_in = 1000, std::string id = "g", double centering = 0.0) {
  if (count < 1 || t_list.empty()) throw ParameterError("birkhoff_ensemble: empty request");
  std::sort(t_list.begin(), t_list.end());
  std::vector<std::vector<double>> per(count, std::vector<double>(t_list.size()));
  parallel_for(count, [&](std::size_t i) {
    Walker w(chain, derive_seed(seed, i), x0);
    w.skip(burn_in);
    double S = 0.0;
    double phi = w.state();
    std::size_t j = 0;
    for (std::uint64_t k = 1; k <= t_list.back(); ++k) {
      S += g(phi);
      while (j < t_list.size() && t_list[j] == k) {
        per[i][j] = S / std::sqrt(static_cast<double>(k));
        ++j;
      }
      if (k < t_list.back()) phi = w.next();
    }
  });
  std::vector<CltSample> out(t_list.size());
  for (std::size_t j = 0; j < t_list.size(); ++j) {
    out[j].t = t_list[j];
    out[j].observable = id;
    out[j].centering = centering;
    out[j].values.resize(count);
    for (std::size_t i = 0; i < count; ++i) out[j].values[i] = per[i][j];
  }
  return out;
}

struct IotaResult {
  double iota2 = 0.0;
  std::size_t terms = 0;
  /// The Green-Kubo sum came out negative (truncation artefact).
  bool negative = false;
};

/// Green-Kubo sum int g^2 dmu + 2 sum_t int g U^t g dmu with U = M on cell averages of g,
/// re-centred under the Ulam density h.
inline IotaResult iota_squared(const UlamOperator& op, const std::vector<double>& h, std::vector<double> g_cells,
                               std::size_t t_max = 100000, double tol = 1e-12) {
  double mg = 0.0;
  for (std::size_t j = 0; j < h.size(); ++j) mg += h[j] * g_cells[j];
  double habs = 0.0;
  for (std::size_t j = 0; j < h.size(); ++j) {
    g_cells[j] -= mg;
    habs += h[j] * std::abs(g_cells[j]);
  }
  IotaResult r;
  double sum = 0.0;
  for (std::size_t j = 0; j < h.size(); ++j) sum += h[j] * g_cells[j] * g_cells[j];
  if (habs == 0.0) return r;
  std::vector<double> u = g_cells;
  for (std::size_t t = 1; t <= t_max; ++t) {
    u = op.right(u);
    double term = 0.0, umax = 0.0;
    for (std::size_t j = 0; j < h.size(); ++j) {
      term += h[j] * g_cells[j] * u[j];
      umax = std::max(umax, std::abs(u[j]));
    }
    sum += 2.0 * term;
    r.terms = t;
    if (umax * habs < tol) {
      r.iota2 = sum;
      r.negative = sum < 0.0;
      return r;
    }
  }
  throw ConvergenceError("iota_squared: correlation terms do not decay (no spectral gap?)");
}

struct TestResult {
  double statistic = num::kNaN;
  double p_value = num::kNaN;
};

namespace detail {
inline double poly(const double* c, int n, double x) {
  double r = c[n - 1];
  for (int i = n - 2; i >= 0; --i) r = r * x + c[i];
  return r;
}

struct Moments {
  double n, mean, m2, m3, m4;
};

inline Moments central_moments(const std::vector<double>& x) {
  Moments m{static_cast<double>(x.size()), 0, 0, 0, 0};
  m.mean = std::accumulate(x.begin(), x.end(), 0.0) / m.n;
  for (double v : x) {
    const double d = v - m.mean, d2 = d * d;
    m.m2 += d2;
    m.m3 += d2 * d;
    m.m4 += d2 * d2;
  }
  m.m2 /= m.n;
  m.m3 /= m.n;
  m.m4 /= m.n;
  return m;
}
}  // namespace detail

/// Shapiro-Wilk W with Royston's approximation of coefficients and p-value (3 <= n <= 5000).
inline TestResult shapiro_wilk(std::vector<double> x) {
  const std::size_t n = x.size();
  if (n < 3) throw InsufficientData("shapiro_wilk: need at least 3 values");
  if (n > 5000) throw ParameterError("shapiro_wilk: n > 5000, subsample first");
  std::sort(x.begin(), x.end());
  if (x.back() - x.front() <= 0.0) throw InsufficientData("shapiro_wilk: zero range");
  const double an = static_cast<double>(n);
  const std::size_t n2 = n / 2;
  std::vector<double> a(n2 + 1, 0.0);  // 1-based
  if (n == 3) {
    a[1] = std::sqrt(0.5);
  } else {
    static const double c1[] = {0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056};
    static const double c2[] = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
    std::vector<double> m(n2 + 1);
    double summ2 = 0.0;
    for (std::size_t i = 1; i <= n2; ++i) {
      m[i] = num::normal_quantile((static_cast<double>(i) - 0.375) / (an + 0.25));
      summ2 += m[i] * m[i];
    }
    summ2 *= 2.0;
    const double ssumm2 = std::sqrt(summ2);
    const double rsn = 1.0 / std::sqrt(an);
    const double a1 = detail::poly(c1, 6, rsn) - m[1] / ssumm2;
    std::size_t i1;
    double fac;
    if (n > 5) {
      i1 = 3;
      const double a2 = -m[2] / ssumm2 + detail::poly(c2, 6, rsn);
      fac = std::sqrt((summ2 - 2.0 * m[1] * m[1] - 2.0 * m[2] * m[2]) / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
      a[2] = a2;
    } else {
      i1 = 2;
      fac = std::sqrt((summ2 - 2.0 * m[1] * m[1]) / (1.0 - 2.0 * a1 * a1));
    }
    a[1] = a1;
    for (std::size_t i = i1; i <= n2; ++i) a[i] = -m[i] / fac;
  }
  // Antisymmetric coefficient vector on the order statistics.
  std::vector<double> coef(n, 0.0);
  for (std::size_t i = 1; i <= n2; ++i) {
    coef[i - 1] = -a[i];
    coef[n - i] = a[i];
  }
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / an;
  const double cmean = std::accumulate(coef.begin(), coef.end(), 0.0) / an;
  double sax = 0.0, ssa = 0.0, ssx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ca = coef[i] - cmean, cx = x[i] - mean;
    sax += ca * cx;
    ssa += ca * ca;
    ssx += cx * cx;
  }
  TestResult r;
  r.statistic = sax * sax / (ssa * ssx);
  const double w = r.statistic;
  if (n == 3) {
    const double pi6 = 6.0 / M_PI, stqr = M_PI / 3.0;
    r.p_value = std::max(0.0, pi6 * (std::asin(std::sqrt(w)) - stqr));
    return r;
  }
  double w1 = std::log(1.0 - w);
  double mu, s;
  if (n <= 11) {
    static const double g[] = {-2.273, 0.459};
    static const double c3[] = {0.5440, -0.39978, 0.025054, -6.714e-4};
    static const double c4[] = {1.3822, -0.77857, 0.062767, -0.0020322};
    const double gamma = detail::poly(g, 2, an);
    if (w1 >= gamma) {
      r.p_value = 1e-99;
      return r;
    }
    w1 = -std::log(gamma - w1);
    mu = detail::poly(c3, 4, an);
    s = std::exp(detail::poly(c4, 4, an));
  } else {
    static const double c5[] = {-1.5861, -0.31082, -0.083751, 0.0038915};
    static const double c6[] = {-0.4803, -0.082676, 0.0030302};
    const double ln = std::log(an);
    mu = detail::poly(c5, 4, ln);
    s = std::exp(detail::poly(c6, 3, ln));
  }
  r.p_value = num::normal_sf((w1 - mu) / s);
  return r;
}

/// D'Agostino-Pearson K^2 (skewness test plus Anscombe-Glynn kurtosis test), chi^2_2 p-value.
inline TestResult dagostino_k2(const std::vector<double>& x) {
  const double n = static_cast<double>(x.size());
  if (x.size() < 20) throw InsufficientData("dagostino_k2: need at least 20 values");
  const auto m = detail::central_moments(x);
  if (m.m2 <= 0.0) throw InsufficientData("dagostino_k2: zero variance");
  const double b1 = m.m3 / std::pow(m.m2, 1.5);
  double y = b1 * std::sqrt((n + 1) * (n + 3) / (6.0 * (n - 2)));
  const double beta2 =
      3.0 * (n * n + 27 * n - 70) * (n + 1) * (n + 3) / ((n - 2) * (n + 5) * (n + 7) * (n + 9));
  const double W2 = -1.0 + std::sqrt(2.0 * (beta2 - 1.0));
  const double delta = 1.0 / std::sqrt(0.5 * std::log(W2));
  const double alpha = std::sqrt(2.0 / (W2 - 1.0));
  if (y == 0.0) y = 1.0;
  const double zs = delta * std::log(y / alpha + std::sqrt((y / alpha) * (y / alpha) + 1.0));

  const double b2 = m.m4 / (m.m2 * m.m2);
  const double E = 3.0 * (n - 1) / (n + 1);
  const double varb2 = 24.0 * n * (n - 2) * (n - 3) / ((n + 1) * (n + 1) * (n + 3) * (n + 5));
  const double xk = (b2 - E) / std::sqrt(varb2);
  const double sqrtbeta1 =
      6.0 * (n * n - 5 * n + 2) / ((n + 7) * (n + 9)) * std::sqrt(6.0 * (n + 3) * (n + 5) / (n * (n - 2) * (n - 3)));
  const double A = 6.0 + 8.0 / sqrtbeta1 * (2.0 / sqrtbeta1 + std::sqrt(1.0 + 4.0 / (sqrtbeta1 * sqrtbeta1)));
  const double term1 = 1.0 - 2.0 / (9.0 * A);
  const double denom = 1.0 + xk * std::sqrt(2.0 / (A - 4.0));
  const double term2 = denom == 0.0 ? num::kNaN
                                    : (denom > 0 ? 1.0 : -1.0) * std::cbrt((1.0 - 2.0 / A) / std::abs(denom));
  const double zk = (term1 - term2) / std::sqrt(2.0 / (9.0 * A));
  TestResult r;
  r.statistic = zs * zs + zk * zk;
  r.p_value = std::exp(-0.5 * r.statistic);
  return r;
}

/// Jarque-Bera n/6 (S^2 + (K-3)^2/4), chi^2_2 p-value.
inline TestResult jarque_bera(const std::vector<double>& x) {
  if (x.size() < 2) throw InsufficientData("jarque_bera: need at least 2 values");
  const auto m = detail::central_moments(x);
  if (m.m2 <= 0.0) throw InsufficientData("jarque_bera: zero variance");
  const double S = m.m3 / std::pow(m.m2, 1.5);
  const double K = m.m4 / (m.m2 * m.m2);
  TestResult r;
  r.statistic = m.n / 6.0 * (S * S + 0.25 * (K - 3.0) * (K - 3.0));
  r.p_value = std::exp(-0.5 * r.statistic);
  return r;
}

struct NormalityBattery {
  TestResult shapiro;
  TestResult dagostino;
  TestResult jarque_bera;
  std::size_t size = 0;
  /// Shapiro-Wilk ran on a seeded subsample of this size (0 when the full sample was used).
  std::size_t shapiro_subsample = 0;
};

inline NormalityBattery normality_battery(const std::vector<double>& sample, std::uint64_t subsample_seed = 5000) {
  if (sample.size() < 100) throw InsufficientData("normality_battery: need at least 100 values");
  NormalityBattery b;
  b.size = sample.size();
  if (sample.size() > 5000) {
    std::vector<double> sub(sample);
    Stream rng(subsample_seed);
    for (std::size_t i = 0; i < 5000; ++i) std::swap(sub[i], sub[i + rng.below(sub.size() - i)]);
    sub.resize(5000);
    b.shapiro = shapiro_wilk(sub);
    b.shapiro_subsample = 5000;
  } else {
    b.shapiro = shapiro_wilk(sample);
  }
  b.dagostino = dagostino_k2(sample);
  b.jarque_bera = jarque_bera(sample);
  return b;
}

/// sup_r |F_emp(r) - Phi(r / iota)|.
inline double berry_esseen_distance(const std::vector<double>& sample, double iota) {
  if (!(iota > 0.0)) throw ParameterError("berry_esseen_distance: iota must be > 0");
  return num::ks_distance(sample, [iota](double r) { return num::normal_cdf(r / iota); });
}

struct LdpCell {
  double eps = 0.0;
  std::uint64_t t = 0;
  double p_hat = 0.0;
  /// (1/t) log p_hat; NaN when censored.
  double loghat = num::kNaN;
  bool censored = false;
};

/// Empirical (1/t) log P(S_t > t eps) from samples of S_t/sqrt(t).
inline std::vector<LdpCell> ldp_decay(const std::vector<CltSample>& samples, const std::vector<double>& eps_list) {
  std::vector<LdpCell> out;
  for (const auto& s : samples) {
    if (s.values.empty()) continue;
    const double rt = std::sqrt(static_cast<double>(s.t));
    for (double eps : eps_list) {
      LdpCell c;
      c.eps = eps;
      c.t = s.t;
      std::size_t hits = 0;
      for (double v : s.values)
        if (v * rt > static_cast<double>(s.t) * eps) ++hits;
      c.p_hat = static_cast<double>(hits) / static_cast<double>(s.values.size());
      c.censored = hits == 0;
      if (!c.censored) c.loghat = std::log(c.p_hat) / static_cast<double>(s.t);
      out.push_back(c);
    }
  }
  if (!out.empty() && std::all_of(out.begin(), out.end(), [](const LdpCell& c) { return c.censored; }))
    throw InsufficientData("ldp_decay: every cell is censored");
  return out;
}

}  // namespace hetero
