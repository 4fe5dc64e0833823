#include "fbmlab/fractal_sets.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fbmlab/random.hpp"

namespace fbmlab {

const char* to_string(SetKind kind) {
  switch (kind) {
    case SetKind::full_interval: return "full-interval";
    case SetKind::middle_thirds: return "middle-thirds";
    case SetKind::generalized_cantor: return "generalized-cantor";
  }
  return "unknown";
}

bool FractalSet::contains(double t) const {
  auto it = std::upper_bound(intervals.begin(), intervals.end(), t,
                             [](double value, const Interval& iv) { return value < iv.lo; });
  if (it == intervals.begin()) return false;
  return std::prev(it)->contains(t);
}

double FractalSet::measure() const {
  double total = 0.0;
  for (const auto& iv : intervals) total += iv.length();
  return total;
}

FractalSet full_interval() {
  FractalSet set;
  set.intervals = {{0.0, 1.0}};
  return set;
}

FractalSet generalized_cantor(int branches, double ratio, int generation, std::size_t interval_cap) {
  if (branches < 2) throw DomainError("generalized_cantor: need at least two branches");
  if (!(ratio > 0.0) || branches * ratio >= 1.0) {
    throw InvalidRatio("generalized_cantor: need 0 < r < 1/m (m*r = " + std::to_string(branches * ratio) + ")");
  }
  if (generation < 0) throw DomainError("generalized_cantor: generation must be >= 0");
  const double count = std::pow(static_cast<double>(branches), generation);
  if (count > static_cast<double>(interval_cap)) {
    throw GenerationTooLarge("generation " + std::to_string(generation) + " needs " +
                             std::to_string(count) + " intervals");
  }

  // Left endpoints of the m first-level copies.
  const double gap = (1.0 - branches * ratio) / (branches - 1);
  std::vector<double> offsets(static_cast<std::size_t>(branches));
  for (int b = 0; b < branches; ++b) offsets[static_cast<std::size_t>(b)] = b * (ratio + gap);

  std::vector<double> left{0.0};
  double scale = 1.0;
  for (int g = 0; g < generation; ++g) {
    std::vector<double> next;
    next.reserve(left.size() * static_cast<std::size_t>(branches));
    for (double a : left) {
      for (double off : offsets) next.push_back(a + scale * off);
    }
    left.swap(next);
    scale *= ratio;
  }

  FractalSet set;
  set.kind = SetKind::generalized_cantor;
  set.branches = branches;
  set.ratio = ratio;
  set.generation = generation;
  set.theoretical_dim = std::log(static_cast<double>(branches)) / std::log(1.0 / ratio);
  set.intervals.reserve(left.size());
  for (double a : left) set.intervals.push_back({a, std::min(1.0, a + scale)});
  set.intervals.back().hi = 1.0;
  return set;
}

FractalSet middle_thirds_cantor(int generation, std::size_t interval_cap) {
  FractalSet set = generalized_cantor(2, 1.0 / 3.0, generation, interval_cap);
  set.kind = SetKind::middle_thirds;
  set.theoretical_dim = std::log(2.0) / std::log(3.0);
  return set;
}

double cantor_ratio_for_dimension(int branches, double dim) {
  if (!(dim > 0.0 && dim < 1.0)) throw DomainError("Cantor dimension must lie in (0,1)");
  return std::pow(static_cast<double>(branches), -1.0 / dim);
}

void WeightedTimeSet::validate(double tolerance) const {
  if (times.size() != weights.size()) throw DomainError("WeightedTimeSet: length mismatch");
  double sum = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw DomainError("WeightedTimeSet: negative weight");
    sum += w;
  }
  if (std::abs(sum - 1.0) > tolerance) throw DomainError("WeightedTimeSet: weights do not sum to 1");
}

WeightedTimeSet sample_natural_measure(const FractalSet& set, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw DomainError("sample_natural_measure: n must be >= 1");
  if (set.intervals.empty()) throw DomainError("sample_natural_measure: empty set");
  NormalStream stream(seed, StreamId{0x5e7u, 0});
  WeightedTimeSet out;
  out.times.resize(n);
  const auto count = static_cast<double>(set.intervals.size());
  for (std::size_t i = 0; i < n; ++i) {
    const double u = stream.uniform(2 * i);
    const double v = stream.uniform(2 * i + 1);
    const auto idx = std::min(set.intervals.size() - 1, static_cast<std::size_t>(u * count));
    const Interval& iv = set.intervals[idx];
    out.times[i] = iv.lo + v * iv.length();
  }
  std::sort(out.times.begin(), out.times.end());
  out.weights.assign(n, 1.0 / static_cast<double>(n));
  return out;
}

std::vector<std::size_t> grid_indices_in(const FractalSet& set, const TimeGrid& grid) {
  std::vector<std::size_t> idx;
  std::size_t k = 0;
  const auto& ivs = set.intervals;
  constexpr double slack = 1e-12;  // endpoints computed by different roundings
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double t = grid[i];
    while (k < ivs.size() && ivs[k].hi + slack < t) ++k;
    if (k < ivs.size() && t >= ivs[k].lo - slack) idx.push_back(i);
  }
  return idx;
}

WeightedTimeSet grid_points_in(const FractalSet& set, const TimeGrid& grid) {
  const auto idx = grid_indices_in(set, grid);
  if (idx.empty()) throw DomainError("grid_points_in: no grid point falls inside the set");
  WeightedTimeSet out;
  out.times.reserve(idx.size());
  for (auto i : idx) out.times.push_back(grid[i]);
  out.weights.assign(idx.size(), 1.0 / static_cast<double>(idx.size()));
  return out;
}

}  // namespace fbmlab
