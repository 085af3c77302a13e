#pragma once

// The leverage map family V, F, A, B, T, its derivative, the state-dependent
// noise scale sigma_n, and the geometry of the unimodal map (critical point,
// zero crossing, dynamical core, left extension).

#include <cmath>
#include <sstream>
#include <string>

#include "hetero/errors.hpp"
#include "hetero/numerics.hpp"

namespace hetero {

struct MapParams {
  double gamma0 = 15.969;
  double alpha = 1.64;
  double sigma_eps = 2.7e-5;
  double omega = 0.669;
  double c = 0.0;

  void validate() const {
    std::ostringstream why;
    if (!(gamma0 > 0.0)) why << "gamma0 must be > 0; ";
    if (!(alpha > 0.0)) why << "alpha must be > 0; ";
    if (!(sigma_eps > 0.0)) why << "sigma_eps must be > 0; ";
    if (!(omega >= 0.0 && omega <= 1.0)) why << "omega must lie in [0,1]; ";
    if (!(std::abs(c) <= 1.0)) why << "|c| must be <= 1; ";
    if (!why.str().empty()) throw ParameterError("MapParams: " + why.str());
  }

  friend bool operator==(const MapParams&, const MapParams&) = default;
};

/// (1 - omega) * alpha^2 * sigma_eps.
inline double sigma_bar(const MapParams& p) { return (1.0 - p.omega) * p.alpha * p.alpha * p.sigma_eps; }

/// How the state-dependent noise enters one step of the chain.
///  paper:       T + sqrt(1-phi^2)(g0+c)B / (sqrt(n)(g0+cA)) * eta
///  first_order: same with (g0+cA)^2 in the denominator
///  exact_f:     F(phi, eta*sqrt((1-phi^2)/n)); sigma_n returns the linearised scale
enum class SigmaMode { paper, first_order, exact_f };

inline const char* to_string(SigmaMode m) {
  switch (m) {
    case SigmaMode::paper: return "paper";
    case SigmaMode::first_order: return "first-order";
    case SigmaMode::exact_f: return "exact-F";
  }
  return "?";
}

inline SigmaMode sigma_mode_from_string(const std::string& s) {
  if (s == "paper") return SigmaMode::paper;
  if (s == "first-order" || s == "first_order") return SigmaMode::first_order;
  if (s == "exact-F" || s == "exact-f" || s == "exact_f") return SigmaMode::exact_f;
  throw ParameterError("unknown sigma mode '" + s + "'");
}

class LeverageMap {
 public:
  /// Intermediate quantities shared by A, B, T and T'.
  struct Terms {
    double N;  // 1 + g0 u
    double s;  // 1 - u
    double D;  // omega (1-cu)^2 + sbar N^2 / s^2
    double A;
  };

  explicit LeverageMap(const MapParams& p) : p_(p), sbar_(sigma_bar(p)) { p_.validate(); }

  const MapParams& params() const noexcept { return p_; }
  double sbar() const noexcept { return sbar_; }

  double V(double u, double v) const {
    const double N = 1.0 + p_.gamma0 * u;
    const double w = 1.0 - (u + v);
    if (N == 0.0) throw DomainError("V: 1 + gamma0*u = 0");
    if (w == 0.0) throw DomainError("V: pole at u + v = 1");
    const double lin = 1.0 - p_.c * u;
    const double bracket = p_.omega * lin * lin / (N * N) + sbar_ / (w * w);
    if (!(bracket > 0.0)) throw DomainError("V: nonpositive bracket");
    return 1.0 / std::sqrt(bracket);
  }

  /// Outer Moebius part (V - 1)/(g0 + cV).
  double T_of_V(double v) const {
    const double den = p_.gamma0 + p_.c * v;
    if (den == 0.0) throw DomainError("F: gamma0 + c V = 0");
    return (v - 1.0) / den;
  }

  double F(double phi, double eta) const { return T_of_V(V(phi, eta)); }

  Terms terms(double u) const {
    if (u == 1.0) throw DomainError("A/B: pole at u = 1");
    Terms t;
    t.N = 1.0 + p_.gamma0 * u;
    t.s = 1.0 - u;
    const double lin = 1.0 - p_.c * u;
    t.D = p_.omega * lin * lin + sbar_ * t.N * t.N / (t.s * t.s);
    if (!(t.D > 0.0)) throw DomainError("A/B: nonpositive bracket");
    t.A = t.N / std::sqrt(t.D);
    return t;
  }

  double A(double u) const { return terms(u).A; }

  double B(double u) const {
    const Terms t = terms(u);
    return sbar_ * t.N * t.N * t.N / (t.s * t.D * std::sqrt(t.D));
  }

  /// Deterministic map (A - 1)/(g0 + cA), unclipped.
  double T(double phi) const { return T_of_V(terms(phi).A); }

  double T_prime(double phi) const { return T_prime(terms(phi)); }

  double T_prime(const Terms& t) const {
    const double g0 = p_.gamma0, c = p_.c;
    const double Dp = -2.0 * c * p_.omega * (1.0 - c * (1.0 - t.s)) +
                      sbar_ * (2.0 * t.N * t.N / (t.s * t.s * t.s) + 2.0 * g0 * t.N / (t.s * t.s));
    const double sqD = std::sqrt(t.D);
    const double Ap = g0 / sqD - t.N * Dp / (2.0 * t.D * sqD);
    const double den = g0 + c * t.A;
    return Ap * (g0 + c) / (den * den);
  }

  /// dF/dv at v = 0.
  double dF_dv(double phi) const {
    const Terms t = terms(phi);
    const double den = p_.gamma0 + p_.c * t.A;
    const double dV = -sbar_ * t.N * t.N * t.N / (t.s * t.s * t.s * t.D * std::sqrt(t.D));
    return (p_.gamma0 + p_.c) / (den * den) * dV;
  }

  /// Magnitude of the noise scale (the closed form changes sign below phi = -1/gamma0).
  double sigma_n(double phi, double n, SigmaMode mode = SigmaMode::paper) const {
    if (!(std::abs(phi) < 1.0)) throw DomainError("sigma_n: |phi| >= 1");
    return sigma_n(phi, terms(phi), n, mode);
  }

  double sigma_n(double phi, const Terms& t, double n, SigmaMode mode) const {
    const double root = std::sqrt((1.0 - phi * phi) / n);
    const double den = p_.gamma0 + p_.c * t.A;
    switch (mode) {
      case SigmaMode::paper:
      case SigmaMode::first_order: {
        const double B = sbar_ * t.N * t.N * t.N / (t.s * t.D * std::sqrt(t.D));
        const double s = root * (p_.gamma0 + p_.c) * B / den;
        return std::abs(mode == SigmaMode::paper ? s : s / den);
      }
      case SigmaMode::exact_f: {
        const double dV = sbar_ * t.N * t.N * t.N / (t.s * t.s * t.s * t.D * std::sqrt(t.D));
        return root * std::abs((p_.gamma0 + p_.c) / (den * den) * dV);
      }
    }
    return num::kNaN;
  }

 private:
  MapParams p_;
  double sbar_;
};

struct MapGeometry {
  double crit = 0.0;
  double delta = 0.0;
  double b = 0.0;
  double gamma_gap = 0.0;
  double core_lo = 0.0;
  double core_hi = 0.0;
  double domain_lo = 0.0;
  double domain_hi = 0.0;
  /// T(delta) < crit < delta holds.
  bool core_ordered = false;

  /// Interval [T(1 - Gamma/2)/2, 1 - Gamma/2] that carries every stationary measure.
  double support_lo = 0.0;
  double support_hi = 0.0;
};

inline MapGeometry find_geometry(const LeverageMap& map, double tol = 1e-12) {
  using Check = GeometryError::Check;
  constexpr int kScan = 10000;
  const double h = 1.0 / kScan;

  int crit_cell = -1;
  double prev = map.T_prime(0.0);
  if (!(prev > 0.0)) throw GeometryError(Check::not_unimodal, "T' is not positive at 0");
  for (int i = 1; i < kScan; ++i) {
    const double d = map.T_prime(i * h);
    if (!std::isfinite(d)) throw GeometryError(Check::not_unimodal, "T' not finite on the scan grid");
    if ((d > 0.0) != (prev > 0.0)) {
      if (crit_cell >= 0 || d > 0.0) {
        std::ostringstream os;
        os << "T' changes sign more than once on [0,1) (second change near " << i * h << ")";
        throw GeometryError(Check::not_unimodal, os.str());
      }
      crit_cell = i - 1;
    }
    prev = d;
  }
  if (crit_cell < 0) throw GeometryError(Check::not_unimodal, "T' has no sign change on [0,1)");

  MapGeometry g;
  g.crit = num::bisect([&](double x) { return map.T_prime(x); }, crit_cell * h, (crit_cell + 1) * h, tol);
  g.delta = map.T(g.crit);
  if (!(g.delta > 0.0)) throw GeometryError(Check::no_zero_crossing, "T(crit) <= 0: no positive hump");

  // T decreases on (crit, 1) towards -1/gamma0.
  double lo = g.crit, hi = -1.0;
  for (int i = crit_cell + 1; i < kScan; ++i) {
    const double x = i * h;
    if (x <= g.crit) continue;
    if (map.T(x) < 0.0) {
      hi = x;
      break;
    }
    lo = x;
  }
  if (hi < 0.0) {
    hi = 1.0 - 1e-15;
    if (!(map.T(hi) < 0.0)) throw GeometryError(Check::no_zero_crossing, "T has no zero crossing on (crit, 1)");
  }
  g.b = num::bisect([&](double x) { return map.T(x); }, lo, hi, tol);
  if (!(g.b < 1.0)) throw GeometryError(Check::b_not_below_one, "zero crossing b is not below 1");
  if (!(g.delta < g.b)) {
    std::ostringstream os;
    os.precision(10);
    os << "Delta = " << g.delta << " >= b = " << g.b << ": T has no zero crossing on (Delta, 1)";
    throw GeometryError(Check::delta_not_below_b, os.str());
  }
  g.gamma_gap = g.b - g.delta;
  g.core_hi = g.delta;
  g.core_lo = map.T(g.delta);
  g.core_ordered = g.core_lo < g.crit && g.crit < g.delta;
  g.domain_lo = -g.gamma_gap;
  g.domain_hi = g.b;
  g.support_hi = 1.0 - 0.5 * g.gamma_gap;
  g.support_lo = 0.5 * map.T(g.support_hi);
  return g;
}

/// T on [0, b] plus a positive decreasing arc on [-Gamma, 0).
class ExtendedMap {
 public:
  ExtendedMap(const LeverageMap& map, const MapGeometry& geo) : map_(map), geo_(geo) {
    t0_ = map_.T(0.0);
    d0_ = map_.T_prime(0.0);
    const double G = geo_.gamma_gap;
    if (d0_ > 0.0) {
      k_ = 1.0;
      if (!(t0_ + 2.0 * G * d0_ * k_ < geo_.delta)) k_ = 0.5 * (geo_.delta - t0_) / (2.0 * G * d0_);
      quadratic_ = true;
    } else {
      quadratic_ = false;
      slope_ = -std::abs(d0_);
      if (slope_ == 0.0) slope_ = -1e-3;
      if (!(t0_ - slope_ * G < geo_.delta)) slope_ = -0.5 * (geo_.delta - t0_) / G;
    }
  }

  const LeverageMap& map() const noexcept { return map_; }
  const MapGeometry& geometry() const noexcept { return geo_; }
  bool quadratic_arc() const noexcept { return quadratic_; }
  double arc_scale() const noexcept { return k_; }

  bool in_domain(double phi) const noexcept { return phi >= geo_.domain_lo && phi <= geo_.domain_hi; }

  double T(double phi) const {
    if (phi >= 0.0 && phi <= geo_.domain_hi) return map_.T(phi);
    if (phi < 0.0 && phi >= geo_.domain_lo) return left(phi);
    throw DomainError("extended T: state outside [-Gamma, b]");
  }

  double T_prime(double phi) const {
    if (phi == 0.0) throw DomainError("extended T': junction point 0");
    if (phi > 0.0 && phi <= geo_.domain_hi) return map_.T_prime(phi);
    if (phi < 0.0 && phi >= geo_.domain_lo) {
      if (quadratic_) return d0_ * k_ * (2.0 * phi / geo_.gamma_gap - 1.0);
      return slope_;
    }
    throw DomainError("extended T': state outside [-Gamma, b]");
  }

 private:
  double left(double phi) const {
    if (quadratic_) return t0_ + d0_ * phi * (phi / geo_.gamma_gap - 1.0) * k_;
    return t0_ + slope_ * phi;
  }

  LeverageMap map_;
  MapGeometry geo_;
  double t0_ = 0.0;
  double d0_ = 0.0;
  double k_ = 1.0;
  double slope_ = 0.0;
  bool quadratic_ = true;
};

/// Schwarzian derivative of f from 5-point stencils on f alone. NaN where f' vanishes.
template <class F>
double schwarzian(F&& f, double x, double h = 1e-4) {
  const double fm2 = f(x - 2 * h), fm1 = f(x - h), f0 = f(x), fp1 = f(x + h), fp2 = f(x + 2 * h);
  const double d1 = (fm2 - 8 * fm1 + 8 * fp1 - fp2) / (12 * h);
  const double d2 = (-fm2 + 16 * fm1 - 30 * f0 + 16 * fp1 - fp2) / (12 * h * h);
  const double d3 = (-fm2 + 2 * fm1 - 2 * fp1 + fp2) / (2 * h * h * h);
  if (std::abs(d1) <= 1e-9) return num::kNaN;
  const double r = d2 / d1;
  return d3 / d1 - 1.5 * r * r;
}

/// Schwarzian of T using the closed-form T' and 5-point stencils for T'' and T'''.
inline double schwarzian(const LeverageMap& map, double x, double h = 1e-4) {
  const double d1 = map.T_prime(x);
  if (std::abs(d1) <= 1e-9) return num::kNaN;
  const double pm2 = map.T_prime(x - 2 * h), pm1 = map.T_prime(x - h);
  const double pp1 = map.T_prime(x + h), pp2 = map.T_prime(x + 2 * h);
  const double d2 = (pm2 - 8 * pm1 + 8 * pp1 - pp2) / (12 * h);
  const double d3 = (-pm2 + 16 * pm1 - 30 * d1 + 16 * pp1 - pp2) / (12 * h * h);
  const double r = d2 / d1;
  return d3 / d1 - 1.5 * r * r;
}

}  // namespace hetero
