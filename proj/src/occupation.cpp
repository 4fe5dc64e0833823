#include "fbmlab/occupation.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace fbmlab {

WeightedImage drifted_image(const SamplePath& path, const Eigen::MatrixXd& drift, const WeightedTimeSet& samples) {
  if (drift.rows() != path.size() || drift.cols() != path.dim()) {
    throw GridMismatch("drift must have one row per grid time and one column per coordinate");
  }
  samples.validate(1e-9);
  const auto& grid = path.grid.times();
  const double t_lo = grid.front();
  const double t_hi = grid.back();

  WeightedImage image;
  const auto n = static_cast<Eigen::Index>(samples.size());
  image.weights = Eigen::Map<const Eigen::VectorXd>(samples.weights.data(), n);
  image.values.resize(n, path.dim());
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = samples.times[static_cast<std::size_t>(i)];
    if (t < t_lo || t > t_hi) throw GridMismatch("sample time outside the path grid");
    auto hi = static_cast<Eigen::Index>(std::upper_bound(grid.begin(), grid.end(), t) - grid.begin());
    if (hi >= static_cast<Eigen::Index>(grid.size())) hi = static_cast<Eigen::Index>(grid.size()) - 1;
    const Eigen::Index lo = std::max<Eigen::Index>(0, hi - 1);
    if (lo == hi || grid[static_cast<std::size_t>(lo)] == t) {
      image.values.row(i) = path.values.row(lo) + drift.row(lo);
      continue;
    }
    const double t0 = grid[static_cast<std::size_t>(lo)];
    const double t1 = grid[static_cast<std::size_t>(hi)];
    const double lambda = (t - t0) / (t1 - t0);
    image.values.row(i) = (1.0 - lambda) * (path.values.row(lo) + drift.row(lo)) +
                          lambda * (path.values.row(hi) + drift.row(hi));
  }
  return image;
}

WeightedImage drifted_image(const SamplePath& path, const SamplePath& drift, const WeightedTimeSet& samples) {
  if (!(path.grid == drift.grid)) throw GridMismatch("drift path lives on a different grid");
  return drifted_image(path, drift.values, samples);
}

double OccupationHistogram::total_mass() const {
  double total = 0.0;
  for (const auto& [cell, mass] : cells) total += mass;
  return total;
}

double OccupationHistogram::cell_volume() const { return std::pow(cell_size, static_cast<double>(dim())); }

OccupationHistogram occupation_histogram(const WeightedImage& image, double epsilon, const Eigen::VectorXd& origin) {
  if (!(epsilon > 0.0)) throw DomainError("occupation_histogram: epsilon must be positive");
  if (origin.size() != image.dim()) throw DomainError("occupation_histogram: origin dimension mismatch");
  if (image.values.rows() != image.weights.size()) throw DomainError("occupation_histogram: weights/values mismatch");
  if (std::abs(image.weights.sum() - 1.0) > 1e-9) throw DomainError("occupation_histogram: weights must sum to 1");
  OccupationHistogram hist;
  hist.cell_size = epsilon;
  hist.origin = origin;
  CellIndex cell(static_cast<std::size_t>(image.dim()));
  for (Eigen::Index i = 0; i < image.size(); ++i) {
    for (Eigen::Index j = 0; j < image.dim(); ++j) {
      cell[static_cast<std::size_t>(j)] =
          static_cast<std::int64_t>(std::floor((image.values(i, j) - origin[j]) / epsilon));
    }
    hist.cells[cell] += image.weights[i];
  }
  return hist;
}

OccupationHistogram occupation_histogram(const WeightedImage& image, double epsilon) {
  return occupation_histogram(image, epsilon, Eigen::VectorXd::Zero(image.dim()));
}

double positive_measure_estimate(const OccupationHistogram& hist, double mass_floor) {
  if (mass_floor < 0.0) throw DomainError("positive_measure_estimate: mass_floor must be >= 0");
  const double volume = hist.cell_volume();
  const double threshold = mass_floor * volume;
  std::size_t count = 0;
  for (const auto& [cell, mass] : hist.cells) {
    if (mass > 0.0 && mass >= threshold) ++count;
  }
  return static_cast<double>(count) * volume;
}

std::vector<double> l2_density_diagnostic(std::span<const WeightedImage> ensemble, std::span<const double> radii) {
  if (radii.size() < 2) throw DomainError("l2_density_diagnostic: need at least two radii");
  if (ensemble.empty()) throw DomainError("l2_density_diagnostic: empty ensemble");
  for (double r : radii) {
    if (!(r > 0.0)) throw DomainError("l2_density_diagnostic: radii must be positive");
  }
  const Eigen::Index d = ensemble.front().dim();

  // Radii ascending, with their original positions.
  std::vector<std::size_t> order(radii.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return radii[a] < radii[b]; });
  std::vector<double> r2(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) r2[k] = radii[order[k]] * radii[order[k]];
  const double r2_max = r2.back();

  std::vector<double> fraction(radii.size(), 0.0);
  for (const auto& image : ensemble) {
    if (image.dim() != d) throw DomainError("l2_density_diagnostic: mixed dimensions in ensemble");
    const Eigen::Index n = image.size();
    const double off_diag = 1.0 - image.weights.squaredNorm();
    if (!(off_diag > 0.0)) throw DomainError("l2_density_diagnostic: need at least two weighted points");
    // Bin each pair by the smallest radius exceeding its distance.
    std::vector<double> bins(r2.size(), 0.0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto yi = image.values.row(i);
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const double dist2 = (image.values.row(j) - yi).squaredNorm();
        if (dist2 >= r2_max) continue;
        const auto k = static_cast<std::size_t>(std::upper_bound(r2.begin(), r2.end(), dist2) - r2.begin());
        bins[k] += 2.0 * image.weights[i] * image.weights[j];
      }
    }
    double cumulative = 0.0;
    for (std::size_t k = 0; k < bins.size(); ++k) {
      cumulative += bins[k];
      fraction[order[k]] += cumulative / off_diag;
    }
  }
  std::vector<double> out(radii.size());
  const auto seeds = static_cast<double>(ensemble.size());
  for (std::size_t k = 0; k < radii.size(); ++k) {
    out[k] = fraction[k] / seeds * std::pow(radii[k], -static_cast<double>(d));
  }
  return out;
}

InteriorReport interior_probe(const OccupationHistogram& hist, int radius_cells) {
  if (radius_cells < 1) throw DomainError("interior_probe: radius_cells must be >= 1");
  InteriorReport report;
  report.cell_size = hist.cell_size;
  report.radius_cells = radius_cells;
  std::set<CellIndex> occupied;
  for (const auto& [cell, mass] : hist.cells) {
    if (mass > 0.0) occupied.insert(cell);
  }
  const auto d = static_cast<std::size_t>(hist.dim());
  const int width = 2 * radius_cells + 1;
  std::size_t neighbours = 1;
  for (std::size_t j = 0; j < d; ++j) neighbours *= static_cast<std::size_t>(width);

  CellIndex probe(d);
  for (const auto& cell : occupied) {
    bool full = true;
    for (std::size_t code = 0; code < neighbours && full; ++code) {
      std::size_t rest = code;
      for (std::size_t j = 0; j < d; ++j) {
        probe[j] = cell[j] + static_cast<std::int64_t>(rest % static_cast<std::size_t>(width)) - radius_cells;
        rest /= static_cast<std::size_t>(width);
      }
      full = occupied.count(probe) > 0;
    }
    if (full) report.interior_cells.push_back(cell);
  }
  report.fraction_of_seeds_with_interior = report.interior_cells.empty() ? 0.0 : 1.0;
  return report;
}

InteriorReport interior_probe(std::span<const OccupationHistogram> ensemble, int radius_cells) {
  if (ensemble.empty()) throw DomainError("interior_probe: empty ensemble");
  InteriorReport total;
  total.cell_size = ensemble.front().cell_size;
  total.radius_cells = radius_cells;
  total.seeds = static_cast<int>(ensemble.size());
  std::size_t hits = 0;
  for (const auto& hist : ensemble) {
    InteriorReport one = interior_probe(hist, radius_cells);
    if (!one.interior_cells.empty()) ++hits;
    if (total.interior_cells.empty()) total.interior_cells = std::move(one.interior_cells);
  }
  total.fraction_of_seeds_with_interior = static_cast<double>(hits) / static_cast<double>(ensemble.size());
  return total;
}

}  // namespace fbmlab
