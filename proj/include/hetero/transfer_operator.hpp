#pragma once

// Ulam discretisation of the Markov operator on I_Gamma: a banded
// row-stochastic matrix, its left fixed vector (stationary density),
// the second eigenvalue modulus and correlation sequences.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <vector>

#include "hetero/core_maps.hpp"
#include "hetero/density.hpp"
#include "hetero/errors.hpp"
#include "hetero/noise_kernel.hpp"
#include "hetero/numerics.hpp"
#include "hetero/rng.hpp"

namespace hetero {

class UlamOperator {
 public:
  struct Row {
    std::size_t first = 0;
    std::vector<double> values;
  };

  UlamOperator(double lo, double hi, std::vector<Row> rows, double max_defect)
      : lo_(lo), hi_(hi), rows_(std::move(rows)), max_defect_(max_defect) {}

  std::size_t size() const noexcept { return rows_.size(); }
  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  double width() const noexcept { return (hi_ - lo_) / static_cast<double>(rows_.size()); }
  double center(std::size_t i) const noexcept { return lo_ + width() * (static_cast<double>(i) + 0.5); }
  const Row& row(std::size_t i) const { return rows_[i]; }
  /// Largest mass lost past the grid before rows were renormalised.
  double max_defect() const noexcept { return max_defect_; }

  double at(std::size_t i, std::size_t j) const {
    const Row& r = rows_[i];
    if (j < r.first || j >= r.first + r.values.size()) return 0.0;
    return r.values[j - r.first];
  }

  /// y = x M (action on measures).
  std::vector<double> left(const std::vector<double>& x) const {
    std::vector<double> y(rows_.size(), 0.0);
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      const double xi = x[i];
      if (xi == 0.0) continue;
      const Row& r = rows_[i];
      for (std::size_t k = 0; k < r.values.size(); ++k) y[r.first + k] += xi * r.values[k];
    }
    return y;
  }

  /// y = M g (action on functions).
  std::vector<double> right(const std::vector<double>& g) const {
    std::vector<double> y(rows_.size(), 0.0);
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      const Row& r = rows_[i];
      double s = 0.0;
      for (std::size_t k = 0; k < r.values.size(); ++k) s += r.values[k] * g[r.first + k];
      y[i] = s;
    }
    return y;
  }

  /// Average of f over each cell (8-point Gauss-Legendre).
  template <class F>
  std::vector<double> cell_average(F&& f) const {
    const auto gl = num::gauss_legendre_nodes(0.0, 1.0, 8);
    std::vector<double> out(rows_.size());
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      const double a = lo_ + width() * static_cast<double>(i);
      double s = 0.0;
      for (std::size_t k = 0; k < gl.x.size(); ++k) s += gl.w[k] * f(a + gl.x[k] * width());
      out[i] = s;
    }
    return out;
  }

 private:
  double lo_, hi_;
  std::vector<Row> rows_;
  double max_defect_;
};

/// M[i][j] = (1/|cell_i|) int_{cell_i} int_{cell_j} p_n(x, z) dz dx over m cells of I_Gamma.
/// z: exact CDF differences; x: composite 8-point Gauss-Legendre, panels sized to the kernel width.
inline UlamOperator build_ulam(const ExtendedMap& T, const NoiseSpec& spec, std::size_t m,
                               SigmaMode mode = SigmaMode::paper) {
  if (m < 32) throw ParameterError("build_ulam: need at least 32 cells");
  if (mode == SigmaMode::exact_f) throw ParameterError("build_ulam: exact-F kernel is not a location-scale family");
  const MapGeometry& g = T.geometry();
  const double lo = g.support_lo, hi = g.support_hi;
  const double w = (hi - lo) / static_cast<double>(m);
  const auto gl = num::gauss_legendre_nodes(0.0, 1.0, 8);
  const double a = spec.a();
  std::vector<UlamOperator::Row> rows(m);
  double max_defect = 0.0;
  const auto clampcell = [&](double z) {
    const double p = std::floor((z - lo) / w);
    return static_cast<std::size_t>(std::clamp(p, 0.0, static_cast<double>(m - 1)));
  };
  std::vector<double> tx, sx, wx;
  for (std::size_t i = 0; i < m; ++i) {
    const double x0 = lo + w * static_cast<double>(i);
    // panel count: T may move by at most half of min(cell, kernel width) across one panel
    double tmin = T.T(x0), tmax = tmin, smin = std::abs(T.map().sigma_n(x0, spec.n(), mode));
    for (int k = 1; k <= 64; ++k) {
      const double x = x0 + w * k / 64.0;
      const double t = T.T(x);
      tmin = std::min(tmin, t);
      tmax = std::max(tmax, t);
      smin = std::min(smin, std::abs(T.map().sigma_n(x, spec.n(), mode)));
    }
    const double scale = std::min(w, 2.0 * a * smin);
    const std::size_t panels =
        scale > 0.0 ? std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(2.0 * (tmax - tmin) / scale)), 1, 4096)
                    : 1;
    tx.clear();
    sx.clear();
    wx.clear();
    double zmin = hi, zmax = lo;
    for (std::size_t p = 0; p < panels; ++p) {
      for (std::size_t k = 0; k < gl.x.size(); ++k) {
        const double x = x0 + w * (static_cast<double>(p) + gl.x[k]) / static_cast<double>(panels);
        const double t = T.T(x), sg = T.map().sigma_n(x, spec.n(), mode);
        if (!(sg > 0.0)) throw DomainError("build_ulam: sigma_n vanishes on a quadrature node of I_Gamma");
        tx.push_back(t);
        sx.push_back(sg);
        wx.push_back(gl.w[k] / static_cast<double>(panels));
        zmin = std::min(zmin, t - a * sg);
        zmax = std::max(zmax, t + a * sg);
      }
    }
    const std::size_t j0 = clampcell(zmin), j1 = clampcell(zmax);
    UlamOperator::Row& row = rows[i];
    row.first = j0;
    row.values.assign(j1 - j0 + 1, 0.0);
    for (std::size_t k = 0; k < tx.size(); ++k) {
      // only the cells this node's kernel reaches
      const std::size_t k0 = clampcell(tx[k] - a * sx[k]), k1 = clampcell(tx[k] + a * sx[k]);
      double prev = spec.cdf((lo + w * static_cast<double>(k0) - tx[k]) / sx[k]);
      for (std::size_t j = k0; j <= k1; ++j) {
        const double cur = spec.cdf((lo + w * static_cast<double>(j + 1) - tx[k]) / sx[k]);
        row.values[j - j0] += wx[k] * std::max(0.0, cur - prev);  // interpolation roundoff in the tails
        prev = cur;
      }
    }
    double sum = 0.0;
    for (double v : row.values) sum += v;
    const double defect = std::abs(1.0 - sum);
    max_defect = std::max(max_defect, defect);
    if (defect > 1e-6) {
      std::ostringstream os;
      os << "build_ulam: row " << i << " loses mass " << defect << " past the grid";
      throw ConvergenceError(os.str());
    }
    for (double& v : row.values) v /= sum;
  }
  return UlamOperator(lo, hi, std::move(rows), max_defect);
}

struct StationaryResult {
  DensityEstimate density;
  std::size_t iterations = 0;
  double residual = 0.0;
  /// Largest L1 distance between the fixed vector and those reached from random starts.
  double restart_max_l1 = 0.0;
  bool unique = true;
};

namespace detail {
inline double l1(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

inline std::vector<double> power_fixed(const UlamOperator& op, std::vector<double> h, double tol,
                                       std::size_t max_iter, std::size_t& iters, double& residual) {
  double s = 0.0;
  for (double v : h) s += v;
  for (double& v : h) v /= s;
  // lazy iteration h <- (h + hM)/2: same fixed point, no oscillation when M has an eigenvalue near -1
  for (iters = 1; iters <= max_iter; ++iters) {
    std::vector<double> nh = op.left(h);
    double tot = 0.0;
    for (double v : nh) tot += v;
    for (double& v : nh) v /= tot;
    residual = l1(nh, h);
    if (residual < tol) {
      h.swap(nh);
      return h;
    }
    for (std::size_t i = 0; i < h.size(); ++i) h[i] = 0.5 * (h[i] + nh[i]);
  }
  std::ostringstream os;
  os << "stationary_density: power iteration did not reach residual " << tol << " (last " << residual << ")";
  throw ConvergenceError(os.str());
}
}  // namespace detail

inline StationaryResult stationary_density(const UlamOperator& op, double tol = 1e-12, std::size_t max_iter = 100000,
                                           int restarts = 5, std::uint64_t seed = 20240101) {
  StationaryResult res;
  std::vector<double> h(op.size(), 1.0);
  h = detail::power_fixed(op, h, tol, max_iter, res.iterations, res.residual);
  Stream rng(seed);
  for (int r = 0; r < restarts; ++r) {
    std::vector<double> x(op.size());
    for (double& v : x) v = 0.01 + rng.uniform();
    std::size_t it = 0;
    double resid = 0.0;
    x = detail::power_fixed(op, x, tol, max_iter, it, resid);
    res.restart_max_l1 = std::max(res.restart_max_l1, detail::l1(x, h));
  }
  res.unique = res.restart_max_l1 < 1e-8;
  res.density.lo = op.lo();
  res.density.hi = op.hi();
  res.density.masses = std::move(h);
  std::ostringstream note;
  note << "Ulam fixed point, m = " << op.size() << ", " << res.iterations << " iterations";
  res.density.note = note.str();
  return res;
}

struct SpectralGap {
  double lambda1 = 0.0;
  double lambda2_abs = 0.0;
  double gap = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
};

/// |lambda_2| by power iteration on the complement of the fixed vector.
inline SpectralGap spectral_gap(const UlamOperator& op, const std::vector<double>& h, std::size_t max_iter = 20000,
                                double tol = 1e-7, std::uint64_t seed = 7) {
  SpectralGap out;
  {
    const std::vector<double> hm = op.left(h);
    double a = 0.0, b = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
      a += std::abs(hm[i]);
      b += std::abs(h[i]);
    }
    out.lambda1 = a / b;
  }
  Stream rng(seed);
  std::vector<double> w(op.size());
  for (double& v : w) v = rng.uniform() - 0.5;
  auto project = [&](std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += v;
    for (std::size_t i = 0; i < x.size(); ++i) x[i] -= s * h[i];
    double nrm = 0.0;
    for (double v : x) nrm += v * v;
    return std::sqrt(nrm);
  };
  double nrm = project(w);
  for (double& v : w) v /= nrm;
  constexpr std::size_t kBlock = 64;
  double prev_rate = -1.0;
  double rate = 0.0;
  std::size_t it = 0;
  while (it < max_iter) {
    double logsum = 0.0;
    for (std::size_t k = 0; k < kBlock; ++k, ++it) {
      w = op.left(w);
      nrm = project(w);
      if (nrm == 0.0) {
        out.lambda2_abs = 0.0;
        out.gap = 1.0;
        out.converged = true;
        out.iterations = it + 1;
        return out;
      }
      logsum += std::log(nrm);
      for (double& v : w) v /= nrm;
    }
    rate = std::exp(logsum / kBlock);
    if (prev_rate >= 0.0 && std::abs(rate - prev_rate) < tol) {
      out.converged = true;
      break;
    }
    prev_rate = rate;
  }
  out.iterations = it;
  out.lambda2_abs = rate;
  out.gap = 1.0 - rate;
  return out;
}

/// C(t) = | sum_j (nu M^t)_j g_j - nu(1) sum_j h_j g_j |, nu_j = f_j |cell|, for t = 0..t_max.
inline std::vector<double> correlation_sequence(const UlamOperator& op, const std::vector<double>& h,
                                                const std::vector<double>& f, const std::vector<double>& g,
                                                std::size_t t_max) {
  std::vector<double> nu(op.size());
  double mass = 0.0, mu_g = 0.0;
  for (std::size_t j = 0; j < op.size(); ++j) {
    nu[j] = f[j] * op.width();
    mass += nu[j];
    mu_g += h[j] * g[j];
  }
  std::vector<double> out;
  out.reserve(t_max + 1);
  for (std::size_t t = 0; t <= t_max; ++t) {
    double s = 0.0;
    for (std::size_t j = 0; j < op.size(); ++j) s += nu[j] * g[j];
    out.push_back(std::abs(s - mass * mu_g));
    if (t < t_max) nu = op.left(nu);
  }
  return out;
}

/// Log-linear fit of C(t) over t = 1.. while C(t) stays above floor * C(0).
inline num::LinearFit correlation_decay_fit(const std::vector<double>& C, double floor = 1e-10) {
  std::vector<double> x, y;
  for (std::size_t t = 1; t < C.size(); ++t) {
    if (!(C[t] > floor * C[0])) break;
    x.push_back(static_cast<double>(t));
    y.push_back(std::log(C[t]));
  }
  return num::ols(x, y);
}

}  // namespace hetero
