#pragma once

// Small numerical kernels shared by the modules: bracketing root finders,
// Gauss quadrature, least squares, normal law helpers and sup-distances.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/erf.hpp>

#include "hetero/errors.hpp"

namespace hetero::num {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Bisection for a sign change of f on [lo, hi]; stops when hi - lo < tol.
template <class F>
double bisect(F&& f, double lo, double hi, double tol) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) throw DomainError("bisect: interval does not bracket a sign change");
  while (hi - lo >= tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // interval at machine resolution
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// 8-point Gauss-Legendre rule on [a, b].
template <class F>
double gauss_legendre8(F&& f, double a, double b) {
  return boost::math::quadrature::gauss<double, 8>::integrate(std::forward<F>(f), a, b);
}

/// Nodes and weights of the 8-point Gauss-Legendre rule mapped to [a, b].
struct QuadratureNodes {
  std::vector<double> x;
  std::vector<double> w;
};

inline QuadratureNodes gauss_legendre_nodes(double a, double b, int order = 8) {
  using boost::math::quadrature::gauss;
  QuadratureNodes q;
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  auto push = [&](const auto& absc, const auto& wts) {
    for (std::size_t i = 0; i < absc.size(); ++i) {
      if (absc[i] == 0.0) {
        q.x.push_back(mid);
        q.w.push_back(half * wts[i]);
      } else {
        q.x.push_back(mid - half * absc[i]);
        q.w.push_back(half * wts[i]);
        q.x.push_back(mid + half * absc[i]);
        q.w.push_back(half * wts[i]);
      }
    }
  };
  switch (order) {
    case 4: push(gauss<double, 4>::abscissa(), gauss<double, 4>::weights()); break;
    case 8: push(gauss<double, 8>::abscissa(), gauss<double, 8>::weights()); break;
    case 16: push(gauss<double, 16>::abscissa(), gauss<double, 16>::weights()); break;
    default: throw ParameterError("gauss_legendre_nodes: order must be 4, 8 or 16");
  }
  return q;
}

/// Adaptive Gauss-Kronrod (15/31) integration to a relative tolerance.
template <class F>
double integrate_adaptive(F&& f, double a, double b, double rel_tol = 1e-12, double* error_out = nullptr) {
  double err = 0.0;
  double l1 = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(std::forward<F>(f), a, b, 20,
                                                                                   rel_tol, &err, &l1);
  if (error_out) *error_out = err;
  if (!std::isfinite(v) || err > std::max(rel_tol * 100.0, 1e-9) * std::max(1.0, std::abs(l1))) {
    throw ConvergenceError("integrate_adaptive: quadrature did not converge");
  }
  return v;
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

inline double normal_sf(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

inline double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }

inline double normal_quantile(double p) {
  if (p <= 0.0) return -std::numeric_limits<double>::infinity();
  if (p >= 1.0) return std::numeric_limits<double>::infinity();
  return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p);
}

struct LinearFit {
  double slope = kNaN;
  double intercept = kNaN;
  double r2 = kNaN;
};

/// Ordinary least squares y = intercept + slope * x.
inline LinearFit ols(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw InsufficientData("ols: need at least two paired points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw InsufficientData("ols: degenerate abscissae");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

inline double mean(std::span<const double> v) {
  if (v.empty()) throw InsufficientData("mean: empty sample");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

/// Unbiased sample variance.
inline double variance(std::span<const double> v) {
  if (v.size() < 2) throw InsufficientData("variance: need two values");
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

/// Sup-distance between the empirical CDF of a sample and a continuous CDF.
template <class Cdf>
double ks_distance(std::vector<double> sample, Cdf&& cdf) {
  if (sample.empty()) throw InsufficientData("ks_distance: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

/// Two-sample Kolmogorov-Smirnov statistic.
inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw InsufficientData("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

/// Standard error of the mean by non-overlapping batch means.
inline double batch_means_se(std::span<const double> v, std::size_t batches = 100) {
  if (batches < 2 || v.size() < batches) throw InsufficientData("batch_means_se: fewer samples than batches");
  const std::size_t len = v.size() / batches;
  std::vector<double> bm(batches);
  for (std::size_t b = 0; b < batches; ++b) {
    double s = 0.0;
    for (std::size_t k = 0; k < len; ++k) s += v[b * len + k];
    bm[b] = s / static_cast<double>(len);
  }
  return std::sqrt(variance(bm) / static_cast<double>(batches));
}

}  // namespace hetero::num
