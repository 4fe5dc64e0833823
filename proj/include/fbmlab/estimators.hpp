#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fbmlab/core.hpp"
#include "fbmlab/fbm.hpp"
#include "fbmlab/fractal_sets.hpp"

namespace fbmlab {

enum class GraphSource { function_graph, fbm_graph, drifted_fbm_graph };

const char* to_string(GraphSource source);

/// Finite sample of a graph {(t, f(t)) : t in A}. Row i of `values` is the
/// spatial part of point i. When `links` is non-empty, links[i] != 0 means
/// points i and i+1 are joined by a straight segment (a sampled path on a
/// contiguous piece of A) and the segment is counted as part of the graph.
struct GraphCloud {
  Eigen::VectorXd times;
  Eigen::MatrixXd values;
  std::vector<std::uint8_t> links;
  GraphSource source = GraphSource::function_graph;
  double hurst_context = 0.5;

  Eigen::Index size() const noexcept { return times.size(); }
  Eigen::Index dim() const noexcept { return values.cols(); }
  bool linked() const noexcept { return !links.empty(); }
  void validate() const;
};

/// Graph of a path over all grid points (indices empty) or over the listed
/// grid indices. With `polyline`, consecutive indices that are adjacent on
/// the grid are linked.
GraphCloud graph_of_path(const SamplePath& path, std::span<const std::size_t> indices, bool polyline,
                         GraphSource source = GraphSource::fbm_graph);

struct BoxCountOptions {
  /// Grid offset in units of one cell, applied on every axis.
  double anchor_shift = 0.0;
};

/// Number of anchored parabolic boxes [i d, (i+1) d] x prod [k_j d^H, (k_j+1) d^H]
/// met by the cloud. Time is anchored at 0 (t = 1 belongs to the last column);
/// each value axis is anchored at the cloud's minimum on that axis.
std::size_t parabolic_box_count(const GraphCloud& cloud, double delta, double hurst,
                                const BoxCountOptions& options = {});

struct BoxCountCurve {
  std::vector<double> deltas;
  std::vector<std::size_t> counts;
};

BoxCountCurve box_count_curve(const GraphCloud& cloud, std::span<const double> deltas, double hurst,
                              const BoxCountOptions& options = {});

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Ordinary least squares y = intercept + slope * x.
LinearFit least_squares(std::span<const double> x, std::span<const double> y);

struct DimensionEstimate {
  double exponent = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double delta_min = 0.0;
  double delta_max = 0.0;
  int n_points_used = 0;
};

struct FitOptions {
  /// Octaves trimmed at the coarse and fine ends before regression.
  double trim_coarse_octaves = 1.0;
  double trim_fine_octaves = 1.0;
  /// Minimum number of scales that must survive trimming; otherwise the
  /// full curve is used.
  int min_points = 3;
};

/// Slope of log N(delta) against log(1/delta) over the trimmed fit range.
DimensionEstimate fit_box_dimension(const BoxCountCurve& curve, const FitOptions& options = {});

DimensionEstimate estimate_parabolic_dimension(const GraphCloud& cloud, std::span<const double> deltas,
                                               double hurst, const FitOptions& fit = {},
                                               const BoxCountOptions& boxes = {});

/// Dyadic scales 2^-k for k = k_coarse..k_fine.
std::vector<double> dyadic_scales(int k_coarse, int k_fine);

struct EnergyOptions {
  std::size_t exact_limit = 4096;
  std::size_t sampled_pairs = 1'000'000;
  std::uint64_t seed = 0;
};

/// sum_{i != j} w_i w_j rho_H(u_i, u_j)^{-gamma/H}. Exact over all pairs up to
/// `exact_limit` points, unbiased pair sampling above.
double energy_integral_mc(const WeightedTimeSet& measure, const Eigen::MatrixXd& values, double gamma,
                          double hurst, const EnergyOptions& options = {});

struct KernelOptions {
  /// Distance from the critical exponent H d below which the estimate is refused.
  double boundary_margin = 1e-2;
};

/// Monte Carlo mean of max(t^H, t^alpha ||N||_inf)^{-gamma/H}, N ~ N(0, I_d).
double kernel_expectation_mc(double t, double alpha, double hurst, double gamma, int d, std::size_t n,
                             std::uint64_t seed, const KernelOptions& options = {});

}  // namespace fbmlab
