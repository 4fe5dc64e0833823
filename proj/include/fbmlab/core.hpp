#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace fbmlab {

/// Base class for every error raised by the library. Numerical failures and
/// domain violations are distinguished so the CLI can map them to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid arguments, malformed configs, violated preconditions.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The computation itself failed (factorization, conditioning, regression).
class NumericalError : public Error {
 public:
  using Error::Error;
};

#define FBMLAB_DEFINE_ERROR(Name, Base)   \
  class Name : public Base {              \
   public:                                \
    using Base::Base;                     \
  };

FBMLAB_DEFINE_ERROR(CovarianceNotPSD, NumericalError)
FBMLAB_DEFINE_ERROR(SingularConditioning, NumericalError)
FBMLAB_DEFINE_ERROR(DegenerateRange, NumericalError)
FBMLAB_DEFINE_ERROR(GenerationTooLarge, DomainError)
FBMLAB_DEFINE_ERROR(InvalidRatio, DomainError)
FBMLAB_DEFINE_ERROR(AlphaExceedsH, DomainError)
FBMLAB_DEFINE_ERROR(HOrderViolation, DomainError)
FBMLAB_DEFINE_ERROR(GammaAtBoundary, DomainError)
FBMLAB_DEFINE_ERROR(GridMismatch, DomainError)
FBMLAB_DEFINE_ERROR(InfeasibleParameters, DomainError)
FBMLAB_DEFINE_ERROR(ConfigError, DomainError)

#undef FBMLAB_DEFINE_ERROR

/// Hurst index, strictly inside (0,1).
class HurstIndex {
 public:
  explicit HurstIndex(double value) : value_(value) {
    if (!(value > 0.0 && value < 1.0)) {
      throw DomainError("Hurst index must lie in (0,1), got " + std::to_string(value));
    }
  }
  double value() const noexcept { return value_; }
  operator double() const noexcept { return value_; }

 private:
  double value_;
};

/// Strictly increasing times in [0,1].
class TimeGrid {
 public:
  TimeGrid() = default;

  /// Arbitrary grid; validates ordering and range.
  explicit TimeGrid(std::vector<double> times);

  /// n_steps + 1 equispaced points 0, 1/n, ..., 1.
  static TimeGrid uniform(std::size_t n_steps);

  const std::vector<double>& times() const noexcept { return times_; }
  std::size_t size() const noexcept { return times_.size(); }
  bool empty() const noexcept { return times_.empty(); }
  bool is_uniform() const noexcept { return uniform_; }
  bool starts_at_zero() const noexcept { return !times_.empty() && times_.front() == 0.0; }
  double operator[](std::size_t i) const { return times_[i]; }

  /// Spacing of a uniform grid; 0 for non-uniform grids.
  double step() const noexcept { return step_; }

  bool operator==(const TimeGrid& other) const {
    return times_ == other.times_ && uniform_ == other.uniform_;
  }

 private:
  std::vector<double> times_;
  bool uniform_ = false;
  double step_ = 0.0;
};

}  // namespace fbmlab
