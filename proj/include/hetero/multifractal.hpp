#pragma once

// Generalised dimensions D(q) from partition sums over boxes of size r,
// with extended occupation numbers for q < 0, and the reference curve of
// the unperturbed map.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "hetero/errors.hpp"
#include "hetero/numerics.hpp"
#include "hetero/orbit_engine.hpp"

namespace hetero {

/// Occupation counts of boxes [lo + i r, lo + (i+1) r) for a list of radii; chunks merge by addition.
class BoxCounts {
 public:
  BoxCounts(double lo, double hi, std::vector<double> radii) : lo_(lo), hi_(hi), radii_(std::move(radii)) {
    if (radii_.empty()) throw ParameterError("BoxCounts: no radii");
    if (!(hi >= lo)) throw ParameterError("BoxCounts: hi < lo");
    for (std::size_t k = 0; k < radii_.size(); ++k) {
      if (!(radii_[k] > 0.0)) throw ParameterError("BoxCounts: radii must be positive");
      if (k > 0 && !(radii_[k] > radii_[k - 1])) throw ParameterError("BoxCounts: radii must increase");
      counts_.emplace_back(static_cast<std::size_t>(std::floor((hi - lo) / radii_[k])) + 1, 0u);
    }
  }

  void add(std::span<const double> chunk) {
    for (double x : chunk)
      if (!(x >= lo_ && x <= hi_)) throw DomainError("BoxCounts: sample outside [lo, hi]");
    for (std::size_t k = 0; k < radii_.size(); ++k) {
      const double inv = 1.0 / radii_[k];
      auto& c = counts_[k];
      for (double x : chunk) {
        std::size_t i = static_cast<std::size_t>((x - lo_) * inv);
        if (i >= c.size()) i = c.size() - 1;
        ++c[i];
      }
    }
    total_ += chunk.size();
  }

  std::uint64_t total() const noexcept { return total_; }
  const std::vector<double>& radii() const noexcept { return radii_; }
  const std::vector<std::uint32_t>& counts(std::size_t k) const { return counts_[k]; }

 private:
  double lo_, hi_;
  std::vector<double> radii_;
  std::vector<std::vector<std::uint32_t>> counts_;
  std::uint64_t total_ = 0;
};

/// n*_i = n_{i-1} + n_i + n_{i+1}.
inline std::vector<std::uint64_t> extended_occupation(const std::vector<std::uint32_t>& n) {
  std::vector<std::uint64_t> out(n.size());
  for (std::size_t i = 0; i < n.size(); ++i) {
    std::uint64_t s = n[i];
    if (i > 0) s += n[i - 1];
    if (i + 1 < n.size()) s += n[i + 1];
    out[i] = s;
  }
  return out;
}

/// Z_r(q) = sum over occupied boxes of n_i^q (n*_i^q when q < 0).
inline double partition_sum(const std::vector<std::uint32_t>& n, double q) {
  double z = 0.0;
  if (q < 0.0) {
    const auto ext = extended_occupation(n);
    for (std::size_t i = 0; i < n.size(); ++i)
      if (n[i] > 0) z += std::pow(static_cast<double>(ext[i]), q);
    return z;
  }
  for (std::uint32_t c : n)
    if (c > 0) z += q == 0.0 ? 1.0 : std::pow(static_cast<double>(c), q);
  return z;
}

/// Partition sum of a sample with boxes anchored at its infimum.
inline double partition_sums(std::span<const double> sample, double r, double q) {
  if (sample.empty()) throw InsufficientData("partition_sums: empty sample");
  const auto [mn, mx] = std::minmax_element(sample.begin(), sample.end());
  BoxCounts bc(*mn, *mx, {r});
  bc.add(sample);
  return partition_sum(bc.counts(0), q);
}

/// Information sum sum_i p_i log p_i.
inline double information_sum(const std::vector<std::uint32_t>& n, std::uint64_t total) {
  const double N = static_cast<double>(total);
  double s = 0.0;
  for (std::uint32_t c : n)
    if (c > 0) {
      const double p = static_cast<double>(c) / N;
      s += p * std::log(p);
    }
  return s;
}

struct DqSpectrum {
  std::vector<double> q;
  std::vector<double> D;
  std::vector<double> r2;
  std::vector<std::size_t> n_radii;
  std::vector<double> radii;
  std::uint64_t sample_size = 0;
  /// Per q: fit R^2 below 0.9.
  std::vector<bool> flagged;
};

inline DqSpectrum dq_spectrum(const BoxCounts& bc, const std::vector<double>& q_grid) {
  DqSpectrum s;
  s.radii = bc.radii();
  s.sample_size = bc.total();
  if (bc.total() == 0) throw InsufficientData("dq_spectrum: empty sample");
  std::vector<double> logr;
  for (double r : bc.radii()) logr.push_back(std::log(r));
  for (double q : q_grid) {
    std::vector<double> x, y;
    for (std::size_t k = 0; k < bc.radii().size(); ++k) {
      double v;
      if (q == 1.0) {
        v = information_sum(bc.counts(k), bc.total());
      } else {
        const double z = partition_sum(bc.counts(k), q);
        if (!(z > 0.0) || !std::isfinite(z)) continue;
        v = std::log(z);
      }
      if (!std::isfinite(v)) continue;
      x.push_back(logr[k]);
      y.push_back(v);
    }
    if (x.size() < 10) throw InsufficientData("dq_spectrum: fewer than 10 valid radii");
    const auto fit = num::ols(x, y);
    s.q.push_back(q);
    s.D.push_back(q == 1.0 ? fit.slope : fit.slope / (q - 1.0));
    s.r2.push_back(fit.r2);
    s.n_radii.push_back(x.size());
    s.flagged.push_back(fit.r2 < 0.9);
  }
  return s;
}

inline DqSpectrum dq_spectrum(std::span<const double> sample, const std::vector<double>& q_grid,
                              const std::vector<double>& r_grid) {
  if (sample.empty()) throw InsufficientData("dq_spectrum: empty sample");
  const auto [mn, mx] = std::minmax_element(sample.begin(), sample.end());
  BoxCounts bc(*mn, *mx, r_grid);
  bc.add(sample);
  return dq_spectrum(bc, q_grid);
}

/// count radii evenly spaced on [lo, hi].
inline std::vector<double> radii_grid(double lo = 5e-6, double hi = 1e-5, std::size_t count = 100) {
  std::vector<double> r(count);
  for (std::size_t i = 0; i < count; ++i) r[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  return r;
}

/// 1 for q < 2, q / (2 (q - 1)) otherwise.
inline double dq_reference(double q) { return q < 2.0 ? 1.0 : q / (2.0 * (q - 1.0)); }

/// Spectrum of one chain orbit streamed in chunks (two passes: infimum/supremum, then counts).
inline DqSpectrum dq_spectrum_streamed(const Chain& chain, double x0, std::uint64_t burn_in, std::uint64_t length,
                                       std::uint64_t seed, const std::vector<double>& q_grid,
                                       const std::vector<double>& r_grid, std::size_t chunk = 1 << 22) {
  double lo = 0.0, hi = 0.0;
  {
    Walker w(chain, seed, x0);
    w.skip(burn_in);
    lo = hi = w.state();
    for (std::uint64_t i = 1; i < length; ++i) {
      const double v = w.next();
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  BoxCounts bc(lo, hi, r_grid);
  Walker w(chain, seed, x0);
  w.skip(burn_in);
  std::vector<double> buf;
  buf.reserve(chunk);
  buf.push_back(w.state());
  for (std::uint64_t i = 1; i < length; ++i) {
    buf.push_back(w.next());
    if (buf.size() == chunk) {
      bc.add(buf);
      buf.clear();
    }
  }
  if (!buf.empty()) bc.add(buf);
  return dq_spectrum(bc, q_grid);
}

}  // namespace hetero
