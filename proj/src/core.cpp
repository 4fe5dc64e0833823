#include "fbmlab/core.hpp"

#include <cmath>

namespace fbmlab {

TimeGrid::TimeGrid(std::vector<double> times) : times_(std::move(times)) {
  if (times_.empty()) throw DomainError("time grid must be non-empty");
  for (std::size_t i = 0; i < times_.size(); ++i) {
    const double t = times_[i];
    if (!(t >= 0.0 && t <= 1.0)) throw DomainError("time grid entries must lie in [0,1]");
    if (i > 0 && !(t > times_[i - 1])) throw DomainError("time grid must be strictly increasing");
  }
}

TimeGrid TimeGrid::uniform(std::size_t n_steps) {
  if (n_steps == 0) throw DomainError("uniform grid needs at least one step");
  TimeGrid grid;
  grid.times_.resize(n_steps + 1);
  const double h = 1.0 / static_cast<double>(n_steps);
  for (std::size_t i = 0; i <= n_steps; ++i) grid.times_[i] = static_cast<double>(i) * h;
  grid.times_.back() = 1.0;
  grid.uniform_ = true;
  grid.step_ = h;
  return grid;
}

}  // namespace fbmlab
