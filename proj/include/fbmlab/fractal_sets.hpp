#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fbmlab/core.hpp"

namespace fbmlab {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const noexcept { return hi - lo; }
  bool contains(double t) const noexcept { return t >= lo && t <= hi; }
};

enum class SetKind { full_interval, middle_thirds, generalized_cantor };

const char* to_string(SetKind kind);

/// Finite-generation approximation of a self-similar subset of [0,1]:
/// m^k disjoint closed intervals of length r^k, sorted left to right.
struct FractalSet {
  SetKind kind = SetKind::full_interval;
  int branches = 1;
  double ratio = 1.0;
  int generation = 0;
  double theoretical_dim = 1.0;
  std::vector<Interval> intervals;

  bool contains(double t) const;
  /// Total Lebesgue measure of the generation-k intervals.
  double measure() const;
};

/// Upper bound on interval records a construction may allocate.
inline constexpr std::size_t kDefaultIntervalCap = std::size_t{1} << 24;

FractalSet full_interval();
FractalSet middle_thirds_cantor(int generation, std::size_t interval_cap = kDefaultIntervalCap);

/// m branches of contraction ratio r placed at 0, ..., 1-r with equal gaps.
FractalSet generalized_cantor(int branches, double ratio, int generation,
                              std::size_t interval_cap = kDefaultIntervalCap);

/// Ratio giving a two-branch Cantor set of the requested dimension.
double cantor_ratio_for_dimension(int branches, double dim);

/// Discrete probability measure on [0,1].
struct WeightedTimeSet {
  std::vector<double> times;
  std::vector<double> weights;

  std::size_t size() const noexcept { return times.size(); }
  /// Throws DomainError unless lengths match, weights >= 0 and sum to 1.
  void validate(double tolerance = 1e-12) const;
};

/// n i.i.d. draws from the self-similar measure (uniform over the
/// generation-k intervals, uniform inside each); weights 1/n, times sorted.
WeightedTimeSet sample_natural_measure(const FractalSet& set, std::size_t n, std::uint64_t seed);

/// Grid times that fall inside the set, equally weighted. A deterministic
/// surrogate of the natural measure when intervals span many grid cells.
WeightedTimeSet grid_points_in(const FractalSet& set, const TimeGrid& grid);

/// Indices of grid times that fall inside the set.
std::vector<std::size_t> grid_indices_in(const FractalSet& set, const TimeGrid& grid);

}  // namespace fbmlab
