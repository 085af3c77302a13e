#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hetero {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A closed-form evaluator was called at a pole or outside its domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Invalid model constants or experiment configuration.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// find_geometry could not establish the unimodal geometry of the map.
class GeometryError : public Error {
 public:
  enum class Check { not_unimodal, no_zero_crossing, delta_not_below_b, b_not_below_one, core_ordering };

  GeometryError(Check which, const std::string& what) : Error(what), check_(which) {}

  Check check() const noexcept { return check_; }

 private:
  Check check_;
};

/// A chain step left the extended domain [-Gamma, b].
class DomainEscape : public Error {
 public:
  DomainEscape(double state, double next, std::size_t step, const std::string& what)
      : Error(what), state_(state), next_(next), step_(step) {}

  double state() const noexcept { return state_; }
  double next() const noexcept { return next_; }
  std::size_t step() const noexcept { return step_; }

 private:
  double state_;
  double next_;
  std::size_t step_;
};

/// The leverage micro-simulation produced a non-finite or nonpositive leverage.
class ModelBreakdown : public Error {
 public:
  using Error::Error;
};

/// An iterative method (quadrature, power iteration, rejection sampler) failed.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Not enough data for the requested statistic.
class InsufficientData : public Error {
 public:
  using Error::Error;
};

}  // namespace hetero
