#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "hetero/errors.hpp"

namespace hetero {

/// Probability masses on a uniform partition of [lo, hi].
struct DensityEstimate {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<double> masses;
  std::uint64_t samples = 0;
  std::string note;

  std::size_t bins() const noexcept { return masses.size(); }
  double width() const noexcept { return (hi - lo) / static_cast<double>(masses.size()); }
  double edge(std::size_t i) const noexcept { return lo + width() * static_cast<double>(i); }
  double center(std::size_t i) const noexcept { return lo + width() * (static_cast<double>(i) + 0.5); }
  double density(std::size_t i) const noexcept { return masses[i] / width(); }

  /// Cumulative mass at x, linear inside each bin.
  double cdf(double x) const {
    if (x <= lo) return 0.0;
    if (x >= hi) return 1.0;
    if (cum_.size() != masses.size() + 1) build_cumulative();
    const double pos = (x - lo) / width();
    std::size_t k = std::min(static_cast<std::size_t>(pos), masses.size() - 1);
    return cum_[k] + (pos - static_cast<double>(k)) * masses[k];
  }

  /// Mass of the interval (a, b).
  double mass_between(double a, double b) const { return cdf(b) - cdf(a); }

  /// Midpoint-rule expectation of f.
  template <class F>
  double expect(F&& f) const {
    double s = 0.0;
    for (std::size_t i = 0; i < masses.size(); ++i) s += masses[i] * f(center(i));
    return s;
  }

  double total() const { return std::accumulate(masses.begin(), masses.end(), 0.0); }

  void invalidate() const { cum_.clear(); }

 private:
  void build_cumulative() const {
    cum_.assign(masses.size() + 1, 0.0);
    for (std::size_t i = 0; i < masses.size(); ++i) cum_[i + 1] = cum_[i] + masses[i];
  }
  mutable std::vector<double> cum_;
};

/// L1 distance between two densities on the same partition (sum of |mass differences|).
inline double l1_distance(const DensityEstimate& p, const DensityEstimate& q) {
  if (p.bins() != q.bins() || std::abs(p.lo - q.lo) > 1e-12 || std::abs(p.hi - q.hi) > 1e-12)
    throw ParameterError("l1_distance: partitions differ");
  double d = 0.0;
  for (std::size_t i = 0; i < p.bins(); ++i) d += std::abs(p.masses[i] - q.masses[i]);
  return d;
}

/// L1 distance between density functions on different uniform partitions of the same interval.
inline double l1_distance_refined(const DensityEstimate& coarse, const DensityEstimate& fine) {
  if (fine.bins() % coarse.bins() != 0) throw ParameterError("l1_distance_refined: bin counts not nested");
  const std::size_t r = fine.bins() / coarse.bins();
  double d = 0.0;
  for (std::size_t j = 0; j < fine.bins(); ++j)
    d += std::abs(fine.masses[j] - coarse.masses[j / r] / static_cast<double>(r));
  return d;
}

/// Integer counts on a uniform partition; merges are exact.
class Histogram {
 public:
  Histogram(double lo, double hi, std::size_t bins) : lo_(lo), hi_(hi), counts_(bins, 0) {
    if (bins == 0 || !(hi > lo)) throw ParameterError("Histogram: need bins > 0 and hi > lo");
    scale_ = static_cast<double>(bins) / (hi - lo);
  }

  void add(double x) {
    if (!(x >= lo_ && x <= hi_)) {
      ++outside_;
      return;
    }
    std::size_t k = static_cast<std::size_t>((x - lo_) * scale_);
    if (k >= counts_.size()) k = counts_.size() - 1;
    ++counts_[k];
    ++inside_;
  }

  void merge(const Histogram& o) {
    if (o.counts_.size() != counts_.size() || o.lo_ != lo_ || o.hi_ != hi_)
      throw ParameterError("Histogram::merge: partitions differ");
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += o.counts_[i];
    inside_ += o.inside_;
    outside_ += o.outside_;
  }

  std::uint64_t inside() const noexcept { return inside_; }
  std::uint64_t outside() const noexcept { return outside_; }
  const std::vector<std::uint64_t>& counts() const noexcept { return counts_; }
  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }

  DensityEstimate to_density(std::string note = {}) const {
    if (inside_ == 0) throw InsufficientData("Histogram: no samples inside the partition");
    DensityEstimate d;
    d.lo = lo_;
    d.hi = hi_;
    d.samples = inside_;
    d.note = std::move(note);
    d.masses.resize(counts_.size());
    const double inv = 1.0 / static_cast<double>(inside_);
    for (std::size_t i = 0; i < counts_.size(); ++i) d.masses[i] = static_cast<double>(counts_[i]) * inv;
    return d;
  }

 private:
  double lo_, hi_, scale_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t inside_ = 0;
  std::uint64_t outside_ = 0;
};

}  // namespace hetero
