#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fbmlab/core.hpp"
#include "fbmlab/fbm.hpp"
#include "fbmlab/fractal_sets.hpp"

namespace fbmlab {

/// Weighted point set in R^d: image of a time measure under a path.
struct WeightedImage {
  Eigen::VectorXd weights;
  Eigen::MatrixXd values;  // one row per point

  Eigen::Index size() const noexcept { return weights.size(); }
  Eigen::Index dim() const noexcept { return values.cols(); }
};

/// Evaluates path + drift at the sample times by linear interpolation on the
/// path grid. `drift` has one row per grid time and one column per coordinate.
WeightedImage drifted_image(const SamplePath& path, const Eigen::MatrixXd& drift, const WeightedTimeSet& samples);

/// Drift given as another path on the same grid.
WeightedImage drifted_image(const SamplePath& path, const SamplePath& drift, const WeightedTimeSet& samples);

using CellIndex = std::vector<std::int64_t>;

/// Occupation measure binned on the grid origin + eps * Z^d.
struct OccupationHistogram {
  double cell_size = 1.0;
  Eigen::VectorXd origin;
  std::map<CellIndex, double> cells;

  Eigen::Index dim() const noexcept { return origin.size(); }
  double total_mass() const;
  double cell_volume() const;
};

/// Cell of point x: floor((x - origin) / eps) per axis.
OccupationHistogram occupation_histogram(const WeightedImage& image, double epsilon);
OccupationHistogram occupation_histogram(const WeightedImage& image, double epsilon, const Eigen::VectorXd& origin);

/// Lebesgue-measure proxy: eps^d times the number of cells whose mass is at
/// least mass_floor * eps^d (i.e. whose density is at least mass_floor).
double positive_measure_estimate(const OccupationHistogram& hist, double mass_floor);

/// r^{-d} times the off-diagonal weighted fraction of pairs (s, t) with
/// ||Y(s) - Y(t)|| < r, averaged over the ensemble. One value per radius, in
/// the order given.
std::vector<double> l2_density_diagnostic(std::span<const WeightedImage> ensemble, std::span<const double> radii);

struct InteriorReport {
  double cell_size = 0.0;
  int radius_cells = 1;
  std::vector<CellIndex> interior_cells;
  double fraction_of_seeds_with_interior = 0.0;
  int seeds = 1;
};

/// Occupied cells whose closed l-inf neighbourhood of `radius_cells` cells is
/// fully occupied (mass > 0).
InteriorReport interior_probe(const OccupationHistogram& hist, int radius_cells);

/// Ensemble wrapper: fraction of histograms with at least one interior cell.
InteriorReport interior_probe(std::span<const OccupationHistogram> ensemble, int radius_cells);

}  // namespace fbmlab
