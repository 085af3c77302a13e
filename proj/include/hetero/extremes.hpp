#pragma once

// Extreme values of phi(x) = -log|x - z| along the chain: boundary levels
// u_t with mu(B(z, e^{-u_t})) = tau/t, block maxima, extremal index and
// Poisson statistics of visits to shrinking balls.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <sstream>
#include <vector>

#include "hetero/density.hpp"
#include "hetero/errors.hpp"
#include "hetero/numerics.hpp"
#include "hetero/orbit_engine.hpp"

namespace hetero {

struct EvtConfig {
  double z = 0.80;
  double tau = std::log(10.0);
  std::vector<std::uint64_t> t_grid = {100, 200, 500, 1000, 2000, 5000, 10000};
  double x0 = 0.38;
  std::uint64_t burn_in = 1000;
  std::uint64_t seed = 2024;

  void validate(const MapGeometry& g) const {
    if (!(tau > 0.0)) throw ParameterError("EvtConfig: tau must be > 0");
    if (!(z >= g.core_lo && z <= g.core_hi)) {
      std::ostringstream os;
      os << "EvtConfig: target z = " << z << " outside the dynamical core [" << g.core_lo << ", " << g.core_hi << "]";
      throw ParameterError(os.str());
    }
    if (t_grid.empty()) throw ParameterError("EvtConfig: empty t grid");
  }
};

/// Bins needed on [lo, hi] so that the bin width is below r_min / 10.
inline std::size_t required_bins(double lo, double hi, double r_min) {
  return static_cast<std::size_t>(std::ceil(10.0 * (hi - lo) / r_min));
}

struct BoundaryLevel {
  std::uint64_t t = 0;
  double u = 0.0;
  double radius = 0.0;  // e^{-u}
  double mass = 0.0;    // recovered mu(B(z, radius))
  double min_density = 0.0;
};

/// Solves mu(B(z, r)) = tau/t for each t by bisection on r; u_t = -log r.
inline std::vector<BoundaryLevel> boundary_levels(const EvtConfig& cfg, const DensityEstimate& mu) {
  std::vector<std::uint64_t> ts = cfg.t_grid;
  std::sort(ts.begin(), ts.end());
  std::vector<BoundaryLevel> out;
  const double rmax = std::max(cfg.z - mu.lo, mu.hi - cfg.z);
  auto mass = [&](double r) { return mu.mass_between(cfg.z - r, cfg.z + r); };
  for (std::uint64_t t : ts) {
    const double target = cfg.tau / static_cast<double>(t);
    if (!(mass(rmax) > target)) throw InsufficientData("boundary_levels: tau/t exceeds the total mass");
    double lo = 0.0, hi = rmax;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (mass(mid) < target ? lo : hi) = mid;
    }
    BoundaryLevel b;
    b.t = t;
    b.radius = 0.5 * (lo + hi);
    b.u = -std::log(b.radius);
    b.mass = mass(b.radius);
    out.push_back(b);
  }
  const double r_min = out.back().radius;
  if (mu.width() > r_min) {
    std::ostringstream os;
    os << "boundary_levels: bin width " << mu.width() << " exceeds the smallest radius " << r_min << "; need at least "
       << required_bins(mu.lo, mu.hi, r_min) << " bins";
    throw InsufficientData(os.str());
  }
  for (auto& b : out) {
    const std::size_t i0 = static_cast<std::size_t>(std::max(0.0, std::floor((cfg.z - b.radius - mu.lo) / mu.width())));
    const std::size_t i1 =
        std::min(mu.bins() - 1, static_cast<std::size_t>(std::floor((cfg.z + b.radius - mu.lo) / mu.width())));
    double mn = mu.density(i0);
    for (std::size_t i = i0; i <= i1; ++i) mn = std::min(mn, mu.density(i));
    b.min_density = mn;
    if (!(mn > 0.0)) {
      std::ostringstream os;
      os << "density vanishes inside B(z, " << b.radius << ") for t = " << b.t
         << ": the target is not in the support";
      throw DomainError(os.str());
    }
  }
  return out;
}

struct BlockMaxima {
  std::uint64_t t = 0;
  double u = 0.0;
  std::uint64_t blocks = 0;
  double p_hat = num::kNaN;
  double std_error = num::kNaN;
  /// Blocks where {max -log d <= u} and {min d >= e^{-u}} disagree.
  std::uint64_t mismatches = 0;
};

/// P(M_t <= u_t) over disjoint blocks of length t of one stationary orbit.
inline std::vector<BlockMaxima> block_maxima_prob(const EvtConfig& cfg, const std::vector<BoundaryLevel>& levels,
                                                  std::span<const double> orbit) {
  std::vector<BlockMaxima> out;
  for (const auto& lv : levels) {
    BlockMaxima bm;
    bm.t = lv.t;
    bm.u = lv.u;
    bm.blocks = orbit.size() / lv.t;
    if (bm.blocks == 0) throw InsufficientData("block_maxima_prob: orbit shorter than one block");
    std::uint64_t below = 0;
    for (std::uint64_t b = 0; b < bm.blocks; ++b) {
      double maxphi = -INFINITY, mind = INFINITY;
      for (std::uint64_t k = b * lv.t; k < (b + 1) * lv.t; ++k) {
        const double d = std::abs(orbit[k] - cfg.z);
        mind = std::min(mind, d);
        maxphi = std::max(maxphi, -std::log(d));
      }
      const bool by_phi = maxphi <= lv.u;
      const bool by_dist = mind >= lv.radius;
      if (by_phi != by_dist) ++bm.mismatches;
      if (by_phi) ++below;
    }
    const double nb = static_cast<double>(bm.blocks);
    bm.p_hat = static_cast<double>(below) / nb;
    bm.std_error = std::sqrt(bm.p_hat * (1.0 - bm.p_hat) / nb);
    out.push_back(bm);
  }
  return out;
}

struct ExtremalIndex {
  std::uint64_t t = 0;
  std::uint64_t visits = 0;
  std::vector<double> q;  // q_k, k = 0..k_max
  double theta = num::kNaN;
  bool censored = false;
};

/// q_k = P(return to B_t(z) first after exactly k+1 steps | start in B_t(z)); theta = 1 - sum q_k.
inline std::vector<ExtremalIndex> extremal_index(const EvtConfig& cfg, const std::vector<BoundaryLevel>& levels,
                                                 std::span<const double> orbit, std::size_t k_max = 20,
                                                 std::uint64_t min_visits = 30) {
  std::vector<ExtremalIndex> out;
  for (const auto& lv : levels) {
    ExtremalIndex e;
    e.t = lv.t;
    e.q.assign(k_max + 1, 0.0);
    std::vector<std::uint64_t> cnt(k_max + 1, 0);
    std::int64_t last = -1;
    // only visits with a full look-ahead window are counted
    const std::uint64_t usable = orbit.size() > k_max + 1 ? orbit.size() - (k_max + 1) : 0;
    for (std::uint64_t i = 0; i < orbit.size(); ++i) {
      if (std::abs(orbit[i] - cfg.z) < lv.radius) {
        if (last >= 0) {
          const std::uint64_t gap = i - static_cast<std::uint64_t>(last);
          if (gap <= k_max + 1 && static_cast<std::uint64_t>(last) < usable) ++cnt[gap - 1];
        }
        if (i < usable) ++e.visits;
        last = static_cast<std::int64_t>(i);
      }
    }
    e.censored = e.visits < min_visits;
    if (!e.censored) {
      double s = 0.0;
      for (std::size_t k = 0; k <= k_max; ++k) {
        e.q[k] = static_cast<double>(cnt[k]) / static_cast<double>(e.visits);
        s += e.q[k];
      }
      e.theta = 1.0 - s;
    }
    out.push_back(e);
  }
  return out;
}

struct PoissonTable {
  double s = 0.0;
  std::uint64_t window = 0;
  std::uint64_t windows = 0;
  std::vector<double> p_hat;  // k = 0..K
  std::vector<double> pmf;    // s^k e^{-s} / k!
  double mean = num::kNaN;
  double chi2 = num::kNaN;
};

/// Visit counts to B(z, radius) in windows of floor(s / mass) steps against Poisson(s).
inline std::vector<PoissonTable> poisson_counts(const EvtConfig& cfg, const BoundaryLevel& level,
                                                const std::vector<double>& s_list, std::span<const double> orbit,
                                                std::size_t k_table = 10) {
  std::vector<PoissonTable> out;
  for (double s : s_list) {
    PoissonTable pt;
    pt.s = s;
    pt.window = static_cast<std::uint64_t>(std::floor(s / level.mass));
    if (pt.window == 0) continue;  // degenerate window
    pt.windows = orbit.size() / pt.window;
    if (pt.windows == 0) throw InsufficientData("poisson_counts: orbit shorter than one window");
    std::vector<std::uint64_t> hist(k_table + 1, 0);
    double total = 0.0;
    for (std::uint64_t w = 0; w < pt.windows; ++w) {
      std::uint64_t c = 0;
      for (std::uint64_t k = w * pt.window; k < (w + 1) * pt.window; ++k)
        if (std::abs(orbit[k] - cfg.z) < level.radius) ++c;
      total += static_cast<double>(c);
      ++hist[std::min<std::uint64_t>(c, k_table)];
    }
    pt.mean = total / static_cast<double>(pt.windows);
    pt.chi2 = 0.0;
    double tail = 1.0;
    for (std::size_t k = 0; k <= k_table; ++k) {
      pt.p_hat.push_back(static_cast<double>(hist[k]) / static_cast<double>(pt.windows));
      double pk;
      if (k < k_table) {
        pk = std::exp(static_cast<double>(k) * std::log(s) - s - std::lgamma(static_cast<double>(k) + 1.0));
        tail -= pk;
      } else {
        pk = std::max(tail, 0.0);  // last cell pools k >= k_table
      }
      pt.pmf.push_back(pk);
      if (pk > 0.0) pt.chi2 += (pt.p_hat[k] - pk) * (pt.p_hat[k] - pk) / pk;
    }
    out.push_back(pt);
  }
  return out;
}

/// Histogram of a stationary orbit fine enough for the radius of the largest t.
inline DensityEstimate evt_density(const Chain& chain, const EvtConfig& cfg, std::uint64_t length, std::size_t bins,
                                   std::uint64_t seed) {
  const MapGeometry& g = chain.geometry();
  return stream_histogram(chain, cfg.x0, length, cfg.burn_in, seed, g.support_lo, g.support_hi, bins)
      .to_density("EVT density orbit");
}

/// States of one stationary orbit after burn-in.
inline std::vector<double> stationary_orbit(const Chain& chain, double x0, std::uint64_t burn_in, std::uint64_t length,
                                            std::uint64_t seed) {
  std::vector<double> out;
  out.reserve(length);
  Walker w(chain, seed, x0);
  w.skip(burn_in);
  for (std::uint64_t i = 0; i < length; ++i) out.push_back(w.next());
  return out;
}

}  // namespace hetero
