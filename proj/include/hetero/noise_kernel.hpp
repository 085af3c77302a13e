#pragma once

// Bump-truncated Gaussian noise g_a(y) = c_a chi_a(y) exp(-y^2/2) on [-a, a],
// its rejection sampler, the admissible amplitude bound and the transition
// kernel p_n(x, z) of the chain.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hetero/core_maps.hpp"
#include "hetero/errors.hpp"
#include "hetero/numerics.hpp"
#include "hetero/rng.hpp"

namespace hetero {

enum class BumpKind { mollifier, plateau };

inline const char* to_string(BumpKind k) { return k == BumpKind::mollifier ? "mollifier" : "plateau"; }

inline BumpKind bump_from_string(const std::string& s) {
  if (s == "mollifier") return BumpKind::mollifier;
  if (s == "plateau") return BumpKind::plateau;
  throw ParameterError("unknown bump kind '" + s + "'");
}

namespace detail {
inline double psi(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }
}  // namespace detail

/// C-infinity bump supported on [-a, a] with chi(0) = 1.
inline double bump_chi(double y, double a, BumpKind kind = BumpKind::mollifier) {
  const double z = std::abs(y) / a;
  if (z >= 1.0) return 0.0;
  if (kind == BumpKind::mollifier) return std::exp(1.0 - 1.0 / (1.0 - z * z));
  if (z <= 0.5) return 1.0;
  const double s = 2.0 * z - 1.0;  // 0 at a/2, 1 at a
  const double up = detail::psi(1.0 - s);
  return up / (up + detail::psi(s));
}

/// c_a = 1 / integral of chi_a(y) exp(-y^2/2) dy.
inline double normalizer(double a, BumpKind kind = BumpKind::mollifier) {
  if (!(a > 0.0)) throw ParameterError("normalizer: a must be > 0");
  auto f = [&](double y) { return bump_chi(y, a, kind) * std::exp(-0.5 * y * y); };
  double half = 0.0;
  if (kind == BumpKind::plateau) {
    half = num::integrate_adaptive(f, 0.0, 0.5 * a, 1e-12) + num::integrate_adaptive(f, 0.5 * a, a, 1e-12);
  } else {
    half = num::integrate_adaptive(f, 0.0, a, 1e-12);
  }
  return 1.0 / (2.0 * half);
}

/// Parameters of the noise law plus its cached normaliser and CDF table.
class NoiseSpec {
 public:
  NoiseSpec(double a, double n, BumpKind bump = BumpKind::mollifier) : a_(a), n_(n), bump_(bump) {
    if (!(a > 0.0) || !std::isfinite(a)) throw ParameterError("NoiseSpec: a must be positive and finite");
    if (!(n >= 1.0)) throw ParameterError("NoiseSpec: n must be >= 1");
    c_a_ = normalizer(a, bump);
    build_cdf();
  }

  double a() const noexcept { return a_; }
  double n() const noexcept { return n_; }
  BumpKind bump() const noexcept { return bump_; }
  double c_a() const noexcept { return c_a_; }

  /// g_a(y).
  double density(double y) const { return c_a_ * bump_chi(y, a_, bump_) * std::exp(-0.5 * y * y); }

  /// Distribution function of g_a (cubic Hermite on a quadrature table).
  double cdf(double y) const {
    if (y <= -a_) return 0.0;
    if (y >= a_) return 1.0;
    const double pos = (y + a_) / h_;
    std::size_t k = static_cast<std::size_t>(pos);
    if (k >= cdf_.size() - 1) k = cdf_.size() - 2;
    const double t = pos - static_cast<double>(k);
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t, h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
    return std::clamp(h00 * cdf_[k] + h10 * h_ * pdf_[k] + h01 * cdf_[k + 1] + h11 * h_ * pdf_[k + 1], 0.0, 1.0);
  }

  /// Total mass accumulated by the CDF table before it is pinned to 1.
  double table_mass() const noexcept { return table_mass_; }

 private:
  void build_cdf() {
    constexpr std::size_t kNodes = 4097;
    h_ = 2.0 * a_ / static_cast<double>(kNodes - 1);
    cdf_.assign(kNodes, 0.0);
    pdf_.assign(kNodes, 0.0);
    const auto gl = num::gauss_legendre_nodes(0.0, 1.0, 16);
    double acc = 0.0;
    for (std::size_t k = 0; k < kNodes; ++k) {
      const double y = -a_ + static_cast<double>(k) * h_;
      pdf_[k] = density(y);
      cdf_[k] = acc;
      if (k + 1 < kNodes) {
        double s = 0.0;
        for (std::size_t i = 0; i < gl.x.size(); ++i) s += gl.w[i] * density(y + gl.x[i] * h_);
        acc += s * h_;
      }
    }
    table_mass_ = acc;
    pdf_.back() = 0.0;
    cdf_.back() = 1.0;
  }

  double a_;
  double n_;
  BumpKind bump_;
  double c_a_ = 0.0;
  double h_ = 0.0;
  double table_mass_ = 0.0;
  std::vector<double> cdf_;
  std::vector<double> pdf_;
};

/// Rejection sampler for g_a: truncated Gaussian proposal by inverse CDF, accepted with prob chi_a(y).
class NoiseSampler {
 public:
  explicit NoiseSampler(const NoiseSpec& spec) : a_(spec.a()), bump_(spec.bump()) {
    p_lo_ = num::normal_cdf(-a_);
    width_ = 1.0 - 2.0 * p_lo_;
  }

  double operator()(Stream& rng) {
    for (int rejects = 0; rejects <= kMaxRejects; ++rejects) {
      ++proposals_;
      const double p = p_lo_ + rng.uniform_open() * width_;
      const double y = std::clamp(num::normal_quantile(p), -a_, a_);
      const double chi = bump_chi(y, a_, bump_);
      if (chi > 0.0 && rng.uniform() < chi) {
        ++accepted_;
        return y;
      }
    }
    std::ostringstream os;
    os << "noise sampler: more than " << kMaxRejects << " consecutive rejections (a = " << a_
       << ", acceptance so far " << acceptance_rate() << ")";
    throw ConvergenceError(os.str());
  }

  double acceptance_rate() const noexcept {
    return proposals_ == 0 ? num::kNaN : static_cast<double>(accepted_) / static_cast<double>(proposals_);
  }
  std::uint64_t proposals() const noexcept { return proposals_; }
  std::uint64_t accepted() const noexcept { return accepted_; }

 private:
  static constexpr int kMaxRejects = 10000;
  double a_;
  BumpKind bump_;
  double p_lo_ = 0.0;
  double width_ = 1.0;
  std::uint64_t proposals_ = 0;
  std::uint64_t accepted_ = 0;
};

inline double sample_noise(const NoiseSpec& spec, Stream& rng) {
  NoiseSampler s(spec);
  return s(rng);
}

struct AdmissibleBound {
  double a = 0.0;
  double sigma_max = 0.0;
  double argmax = 0.0;
  double half_gap = 0.0;    // Gamma/2
  double half_q = 0.0;      // T(0)/2
  double half_floor = 0.0;  // T(1 - Gamma/2)/2
};

/// Largest amplitude a keeping one step of the chain inside I_Gamma:
/// (1/sigma_max) min{Gamma/2, T(0)/2, T(1-Gamma/2)/2}, sigma_max over 10^4 points of [-Gamma, b].
inline AdmissibleBound admissible_a(const LeverageMap& map, const MapGeometry& geo, double n,
                                   SigmaMode mode = SigmaMode::paper) {
  constexpr int kGrid = 10000;
  AdmissibleBound r;
  for (int i = 0; i < kGrid; ++i) {
    const double x = geo.domain_lo + (geo.domain_hi - geo.domain_lo) * i / (kGrid - 1);
    const double s = std::abs(map.sigma_n(x, n, mode));
    if (s > r.sigma_max) {
      r.sigma_max = s;
      r.argmax = x;
    }
  }
  r.half_gap = 0.5 * geo.gamma_gap;
  r.half_q = 0.5 * map.T(0.0);
  r.half_floor = 0.5 * map.T(1.0 - 0.5 * geo.gamma_gap);
  const double m = std::min({r.half_gap, r.half_q, r.half_floor});
  if (!(m > 0.0) || !(r.sigma_max > 0.0)) throw ParameterError("admissible_a: nonpositive bound (degenerate geometry)");
  r.a = m / r.sigma_max;
  return r;
}

/// NoiseSpec whose amplitude is checked against the admissible bound.
inline NoiseSpec make_admissible_spec(const LeverageMap& map, const MapGeometry& geo, double a, double n,
                                      BumpKind bump = BumpKind::mollifier, SigmaMode mode = SigmaMode::paper) {
  const AdmissibleBound bound = admissible_a(map, geo, n, mode);
  if (a > bound.a) {
    std::ostringstream os;
    os.precision(10);
    os << "noise amplitude a = " << a << " exceeds the admissible bound " << bound.a << " (n = " << n
       << ", mode " << to_string(mode) << ")";
    throw ParameterError(os.str());
  }
  return NoiseSpec(a, n, bump);
}

/// p_n(x, z) = g_a((z - T(x))/sigma)/sigma; nullopt when sigma_n(x) = 0 (the kernel is a point mass at T(x)).
inline std::optional<double> kernel_density(double x, double z, const ExtendedMap& T, const NoiseSpec& spec,
                                            SigmaMode mode = SigmaMode::paper) {
  const double s = std::abs(T.map().sigma_n(x, spec.n(), mode));
  if (s == 0.0) return std::nullopt;
  return spec.density((z - T.T(x)) / s) / s;
}

}  // namespace hetero
