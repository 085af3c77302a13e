#pragma once

// Deterministic and random orbits of the chain
//   phi_t = T(phi_{t-1}) + sigma_n(phi_{t-1}) Y_{t-1},
// ensembles with scheduling-independent seeding, and empirical densities.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "hetero/core_maps.hpp"
#include "hetero/density.hpp"
#include "hetero/errors.hpp"
#include "hetero/noise_kernel.hpp"
#include "hetero/rng.hpp"

namespace hetero {

enum class OrbitMode { deterministic, random_paper, random_first_order, random_exact_f };

inline const char* to_string(OrbitMode m) {
  switch (m) {
    case OrbitMode::deterministic: return "deterministic";
    case OrbitMode::random_paper: return "random-paper";
    case OrbitMode::random_first_order: return "random-first-order";
    case OrbitMode::random_exact_f: return "random-exact-F";
  }
  return "?";
}

inline OrbitMode orbit_mode_from_string(const std::string& s) {
  if (s == "deterministic") return OrbitMode::deterministic;
  if (s == "random-paper" || s == "paper") return OrbitMode::random_paper;
  if (s == "random-first-order" || s == "first-order") return OrbitMode::random_first_order;
  if (s == "random-exact-F" || s == "exact-F" || s == "random-exact-f" || s == "exact-f") return OrbitMode::random_exact_f;
  throw ParameterError("unknown orbit mode '" + s + "'");
}

inline SigmaMode sigma_mode_of(OrbitMode m) {
  switch (m) {
    case OrbitMode::random_first_order: return SigmaMode::first_order;
    case OrbitMode::random_exact_f: return SigmaMode::exact_f;
    default: return SigmaMode::paper;
  }
}

inline OrbitMode orbit_mode_of(SigmaMode m) {
  switch (m) {
    case SigmaMode::first_order: return OrbitMode::random_first_order;
    case SigmaMode::exact_f: return OrbitMode::random_exact_f;
    default: return OrbitMode::random_paper;
  }
}

/// One-step transition of the chain on the extended domain [-Gamma, b].
class Chain {
 public:
  Chain(const ExtendedMap& ext, std::optional<NoiseSpec> spec, OrbitMode mode)
      : ext_(ext), spec_(std::move(spec)), mode_(mode) {
    if (mode_ != OrbitMode::deterministic && !spec_) throw ParameterError("Chain: random mode needs a NoiseSpec");
  }

  /// Deterministic chain (no noise).
  explicit Chain(const ExtendedMap& ext) : Chain(ext, std::nullopt, OrbitMode::deterministic) {}

  const ExtendedMap& ext() const noexcept { return ext_; }
  const LeverageMap& map() const noexcept { return ext_.map(); }
  const MapGeometry& geometry() const noexcept { return ext_.geometry(); }
  const std::optional<NoiseSpec>& spec() const noexcept { return spec_; }
  OrbitMode mode() const noexcept { return mode_; }
  bool random() const noexcept { return mode_ != OrbitMode::deterministic; }

  /// Next state from phi with noise draw eta (ignored in deterministic mode).
  double step(double phi, double eta, std::uint64_t index = 0) const {
    if (!ext_.in_domain(phi)) escape(phi, phi, index, "state outside the extended domain");
    double next;
    const MapGeometry& g = ext_.geometry();
    if (mode_ == OrbitMode::deterministic) {
      next = ext_.T(phi);
    } else if (mode_ == OrbitMode::random_exact_f) {
      const double v = eta * std::sqrt((1.0 - phi * phi) / spec_->n());
      next = phi >= 0.0 ? ext_.map().F(phi, v)
                        : ext_.T(phi) + ext_.map().dF_dv(phi) * v;  // linearised on the extension arc
    } else {
      const SigmaMode sm = sigma_mode_of(mode_);
      if (phi >= 0.0 && phi <= g.b) {
        const LeverageMap::Terms t = ext_.map().terms(phi);
        next = ext_.map().T_of_V(t.A) + ext_.map().sigma_n(phi, t, spec_->n(), sm) * eta;
      } else {
        next = ext_.T(phi) + ext_.map().sigma_n(phi, spec_->n(), sm) * eta;
      }
    }
    if (!ext_.in_domain(next)) escape(phi, next, index, "chain step left the extended domain");
    return next;
  }

 private:
  [[noreturn]] static void escape(double phi, double next, std::uint64_t index, const char* what) {
    std::ostringstream os;
    os.precision(17);
    os << what << ": step " << index << ", state " << phi << " -> " << next;
    throw DomainEscape(phi, next, index, os.str());
  }

  ExtendedMap ext_;
  std::optional<NoiseSpec> spec_;
  OrbitMode mode_;
};

/// Streaming generator for one orbit: owns its random stream and sampler.
class Walker {
 public:
  Walker(const Chain& chain, std::uint64_t seed, double x0) : chain_(&chain), rng_(seed), phi_(x0) {
    if (chain.random()) sampler_.emplace(*chain.spec());
  }
  Walker(const Chain&&, std::uint64_t, double) = delete;  // holds a pointer to the chain

  double state() const noexcept { return phi_; }
  std::uint64_t steps() const noexcept { return t_; }

  double next() {
    const double eta = sampler_ ? (*sampler_)(rng_) : 0.0;
    phi_ = chain_->step(phi_, eta, t_);
    ++t_;
    return phi_;
  }

  void skip(std::uint64_t k) {
    for (std::uint64_t i = 0; i < k; ++i) next();
  }

  double acceptance_rate() const { return sampler_ ? sampler_->acceptance_rate() : 1.0; }

 private:
  const Chain* chain_;
  Stream rng_;
  std::optional<NoiseSampler> sampler_;
  double phi_;
  std::uint64_t t_ = 0;
};

struct Trajectory {
  std::vector<double> states;
  std::uint64_t seed = 0;
  OrbitMode mode = OrbitMode::deterministic;
  MapParams params;
  double a = 0.0;
  double n = 0.0;
  BumpKind bump = BumpKind::mollifier;
};

/// states[0] = x0 followed by length - 1 chain steps.
inline Trajectory random_orbit(const Chain& chain, double x0, std::size_t length, std::uint64_t seed) {
  if (length < 1) throw ParameterError("random_orbit: length must be >= 1");
  Trajectory tr;
  tr.seed = seed;
  tr.mode = chain.mode();
  tr.params = chain.map().params();
  if (chain.spec()) {
    tr.a = chain.spec()->a();
    tr.n = chain.spec()->n();
    tr.bump = chain.spec()->bump();
  }
  tr.states.reserve(length);
  Walker w(chain, seed, x0);
  tr.states.push_back(x0);
  for (std::size_t i = 1; i < length; ++i) tr.states.push_back(w.next());
  return tr;
}

/// Worker count: HETERO_THREADS if set, otherwise the hardware concurrency.
inline unsigned worker_count() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("HETERO_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(std::min<long>(v, 1024));
  }
  return hw;
}

/// Runs fn(i) for i in [0, count) on up to worker_count() threads; rethrows the first failure by index.
template <class Fn>
void parallel_for(std::size_t count, Fn&& fn, unsigned workers = 0) {
  if (workers == 0) workers = worker_count();
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(count, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

/// count orbits; member i uses seed derive_seed(master, i) and starting point x0_rule(i).
template <class X0Rule>
std::vector<Trajectory> ensemble(const Chain& chain, X0Rule&& x0_rule, std::size_t count, std::size_t length,
                                 std::uint64_t master_seed, unsigned workers = 0) {
  if (count < 1) throw ParameterError("ensemble: count must be >= 1");
  std::vector<Trajectory> out(count);
  parallel_for(
      count, [&](std::size_t i) { out[i] = random_orbit(chain, x0_rule(i), length, derive_seed(master_seed, i)); },
      workers);
  return out;
}

inline std::vector<Trajectory> ensemble(const Chain& chain, double x0, std::size_t count, std::size_t length,
                                        std::uint64_t master_seed, unsigned workers = 0) {
  return ensemble(chain, [x0](std::size_t) { return x0; }, count, length, master_seed, workers);
}

/// Normalised histogram of states[burn_in:] on [lo, hi].
inline DensityEstimate empirical_density(std::span<const double> states, std::size_t bins, std::size_t burn_in,
                                         double lo, double hi) {
  if (states.size() <= burn_in) throw InsufficientData("empirical_density: nothing left after burn-in");
  if (states.size() - burn_in < bins) throw InsufficientData("empirical_density: fewer samples than bins");
  Histogram h(lo, hi, bins);
  for (std::size_t i = burn_in; i < states.size(); ++i) h.add(states[i]);
  std::ostringstream note;
  note << "histogram, " << h.inside() << " samples, burn-in " << burn_in << ", " << h.outside() << " outside";
  return h.to_density(note.str());
}

/// Pooled histogram over an ensemble; merged in index order.
inline DensityEstimate empirical_density(const std::vector<Trajectory>& orbits, std::size_t bins, std::size_t burn_in,
                                         double lo, double hi) {
  Histogram pooled(lo, hi, bins);
  for (const auto& tr : orbits) {
    Histogram h(lo, hi, bins);
    for (std::size_t i = burn_in; i < tr.states.size(); ++i) h.add(tr.states[i]);
    pooled.merge(h);
  }
  return pooled.to_density("pooled ensemble histogram");
}

/// Histogram of one orbit streamed without storing it.
inline Histogram stream_histogram(const Chain& chain, double x0, std::uint64_t length, std::uint64_t burn_in,
                                  std::uint64_t seed, double lo, double hi, std::size_t bins) {
  Histogram h(lo, hi, bins);
  Walker w(chain, seed, x0);
  w.skip(burn_in);
  for (std::uint64_t i = 0; i < length; ++i) h.add(w.next());
  return h;
}

}  // namespace hetero
