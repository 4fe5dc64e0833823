#include "fbmlab/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fbmlab/parabolic.hpp"
#include "fbmlab/random.hpp"

namespace fbmlab {

const char* to_string(GraphSource source) {
  switch (source) {
    case GraphSource::function_graph: return "function-graph";
    case GraphSource::fbm_graph: return "fbm-graph";
    case GraphSource::drifted_fbm_graph: return "drifted-fbm-graph";
  }
  return "unknown";
}

void GraphCloud::validate() const {
  if (times.size() == 0) throw DomainError("GraphCloud: empty");
  if (values.rows() != times.size()) throw DomainError("GraphCloud: times/values length mismatch");
  if (values.cols() < 1) throw DomainError("GraphCloud: spatial dimension must be >= 1");
  if ((times.array() < 0.0).any() || (times.array() > 1.0).any()) {
    throw DomainError("GraphCloud: times must lie in [0,1]");
  }
  if (!links.empty() && links.size() + 1 != static_cast<std::size_t>(times.size())) {
    throw DomainError("GraphCloud: links must have one entry per consecutive pair");
  }
}

GraphCloud graph_of_path(const SamplePath& path, std::span<const std::size_t> indices, bool polyline,
                         GraphSource source) {
  GraphCloud cloud;
  cloud.source = source;
  cloud.hurst_context = path.hurst_components.empty() ? 0.5 : path.hurst_components.front();
  const auto& t = path.grid.times();
  if (indices.empty()) {
    const Eigen::Index n = path.size();
    cloud.times = Eigen::Map<const Eigen::VectorXd>(t.data(), n);
    cloud.values = path.values;
    if (polyline && n > 1) cloud.links.assign(static_cast<std::size_t>(n - 1), 1);
    return cloud;
  }
  const auto n = static_cast<Eigen::Index>(indices.size());
  cloud.times.resize(n);
  cloud.values.resize(n, path.dim());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto g = indices[static_cast<std::size_t>(i)];
    cloud.times[i] = t[g];
    cloud.values.row(i) = path.values.row(static_cast<Eigen::Index>(g));
  }
  if (polyline && n > 1) {
    cloud.links.resize(static_cast<std::size_t>(n - 1));
    for (std::size_t i = 0; i + 1 < indices.size(); ++i) {
      cloud.links[i] = indices[i + 1] == indices[i] + 1 ? 1 : 0;
    }
  }
  return cloud;
}

namespace {

struct CellGrid {
  double delta = 1.0;
  double side = 1.0;
  double shift = 0.0;
  Eigen::VectorXd origin;
  // Mixed-radix extents: radix[0] for time, radix[1..d] for values.
  std::vector<std::uint64_t> radix;
  bool packable = true;

  CellGrid(const GraphCloud& cloud, double delta_, double hurst, double shift_)
      : delta(delta_), side(std::pow(delta_, hurst)), shift(shift_) {
    origin = cloud.values.colwise().minCoeff().transpose();
    const Eigen::VectorXd top = cloud.values.colwise().maxCoeff().transpose();
    const auto d = static_cast<std::size_t>(cloud.dim());
    radix.resize(d + 1);
    radix[0] = static_cast<std::uint64_t>(std::ceil(1.0 / delta)) + 2;
    for (std::size_t j = 0; j < d; ++j) {
      const double span = (top[static_cast<Eigen::Index>(j)] - origin[static_cast<Eigen::Index>(j)]) / side;
      radix[j + 1] = static_cast<std::uint64_t>(std::floor(span + shift)) + 2;
    }
    std::uint64_t prod = 1;
    for (auto r : radix) {
      if (__builtin_mul_overflow(prod, r, &prod)) {
        packable = false;
        break;
      }
    }
  }

  // Scaled coordinates: integer parts are cell indices.
  void scaled(double t, const auto& x, std::vector<double>& u) const {
    u[0] = t / delta + shift;
    for (std::size_t j = 0; j + 1 < u.size(); ++j) {
      u[j + 1] = (x[static_cast<Eigen::Index>(j)] - origin[static_cast<Eigen::Index>(j)]) / side + shift;
    }
  }

  void cell_of_point(double t, const std::vector<double>& u, std::vector<std::int64_t>& cell) const {
    double c = std::floor(u[0]);
    if (t >= 1.0 && c == u[0] && c > 0.0) c -= 1.0;
    cell[0] = static_cast<std::int64_t>(c);
    for (std::size_t j = 1; j < u.size(); ++j) cell[j] = static_cast<std::int64_t>(std::floor(u[j]));
  }

  std::uint64_t pack(const std::vector<std::int64_t>& cell) const {
    std::uint64_t key = 0;
    for (std::size_t j = 0; j < cell.size(); ++j) {
      const auto idx = static_cast<std::uint64_t>(std::clamp<std::int64_t>(
          cell[j], 0, static_cast<std::int64_t>(radix[j]) - 1));
      key = key * radix[j] + idx;
    }
    return key;
  }
};

// Calls emit(cell) for every cell met by the cloud (points and linked segments).
template <typename Emit>
void for_each_cell(const GraphCloud& cloud, const CellGrid& grid, Emit&& emit) {
  const auto d = static_cast<std::size_t>(cloud.dim());
  std::vector<double> up(d + 1), uq(d + 1), um(d + 1);
  std::vector<std::int64_t> cell(d + 1);
  std::vector<double> cuts;
  const Eigen::Index n = cloud.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    grid.scaled(cloud.times[i], cloud.values.row(i), up);
    grid.cell_of_point(cloud.times[i], up, cell);
    emit(cell);
    if (!cloud.linked() || i + 1 >= n || cloud.links[static_cast<std::size_t>(i)] == 0) continue;

    grid.scaled(cloud.times[i + 1], cloud.values.row(i + 1), uq);
    cuts.clear();
    for (std::size_t a = 0; a <= d; ++a) {
      const double lo = std::min(up[a], uq[a]);
      const double hi = std::max(up[a], uq[a]);
      const double first = std::floor(lo) + 1.0;
      const double diff = uq[a] - up[a];
      for (double k = first; k < hi; k += 1.0) cuts.push_back((k - up[a]) / diff);
    }
    if (cuts.empty()) continue;
    std::sort(cuts.begin(), cuts.end());
    cuts.push_back(1.0);
    double prev = 0.0;
    for (double lambda : cuts) {
      const double mid = 0.5 * (prev + lambda);
      prev = lambda;
      for (std::size_t a = 0; a <= d; ++a) um[a] = up[a] + mid * (uq[a] - up[a]);
      for (std::size_t a = 0; a <= d; ++a) cell[a] = static_cast<std::int64_t>(std::floor(um[a]));
      emit(cell);
    }
  }
}

}  // namespace

std::size_t parabolic_box_count(const GraphCloud& cloud, double delta, double hurst,
                                const BoxCountOptions& options) {
  cloud.validate();
  if (!(delta > 0.0 && delta <= 1.0)) throw DomainError("parabolic_box_count: delta must lie in (0,1]");
  if (!(hurst > 0.0 && hurst < 1.0)) throw DomainError("parabolic_box_count: H must lie in (0,1)");
  const CellGrid grid(cloud, delta, hurst, options.anchor_shift);

  if (grid.packable) {
    std::vector<std::uint64_t> keys;
    keys.reserve(static_cast<std::size_t>(cloud.size()) * (cloud.linked() ? 4 : 1));
    for_each_cell(cloud, grid, [&](const std::vector<std::int64_t>& cell) {
      const std::uint64_t key = grid.pack(cell);
      if (keys.empty() || keys.back() != key) keys.push_back(key);
    });
    std::sort(keys.begin(), keys.end());
    return static_cast<std::size_t>(std::unique(keys.begin(), keys.end()) - keys.begin());
  }

  std::vector<std::vector<std::int64_t>> cells;
  for_each_cell(cloud, grid, [&](const std::vector<std::int64_t>& cell) {
    if (cells.empty() || cells.back() != cell) cells.push_back(cell);
  });
  std::sort(cells.begin(), cells.end());
  return static_cast<std::size_t>(std::unique(cells.begin(), cells.end()) - cells.begin());
}

BoxCountCurve box_count_curve(const GraphCloud& cloud, std::span<const double> deltas, double hurst,
                              const BoxCountOptions& options) {
  BoxCountCurve curve;
  curve.deltas.assign(deltas.begin(), deltas.end());
  std::sort(curve.deltas.begin(), curve.deltas.end(), std::greater<>());
  curve.counts.reserve(curve.deltas.size());
  for (double delta : curve.deltas) curve.counts.push_back(parabolic_box_count(cloud, delta, hurst, options));
  return curve;
}

LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("least_squares: need >= 2 paired samples");
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw DegenerateRange("least_squares: all abscissae equal");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (syy == 0.0) {
    fit.r_squared = 1.0;
  } else {
    const double ss_res = std::max(0.0, syy - fit.slope * sxy);
    fit.r_squared = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
  }
  return fit;
}

std::vector<double> dyadic_scales(int k_coarse, int k_fine) {
  if (k_fine < k_coarse) throw DomainError("dyadic_scales: k_fine < k_coarse");
  std::vector<double> out;
  for (int k = k_coarse; k <= k_fine; ++k) out.push_back(std::ldexp(1.0, -k));
  return out;
}

DimensionEstimate fit_box_dimension(const BoxCountCurve& curve, const FitOptions& options) {
  if (curve.deltas.size() != curve.counts.size()) throw DomainError("BoxCountCurve: length mismatch");
  if (curve.deltas.size() < 4) throw DomainError("dimension fit needs at least 4 scales");
  const auto [dmin_it, dmax_it] = std::minmax_element(curve.deltas.begin(), curve.deltas.end());
  const double dmin = *dmin_it, dmax = *dmax_it;
  if (dmax / dmin < 4.0 * (1.0 - 1e-12)) throw DomainError("dimension fit needs scales spanning >= 2 octaves");
  if (std::all_of(curve.counts.begin(), curve.counts.end(), [&](auto c) { return c == curve.counts.front(); })) {
    throw DegenerateRange("all box counts are equal");
  }

  const double hi = dmax * std::exp2(-options.trim_coarse_octaves) * (1.0 + 1e-9);
  const double lo = dmin * std::exp2(options.trim_fine_octaves) * (1.0 - 1e-9);
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < curve.deltas.size(); ++i) {
    if (curve.deltas[i] <= hi && curve.deltas[i] >= lo) keep.push_back(i);
  }
  if (static_cast<int>(keep.size()) < options.min_points) {
    keep.resize(curve.deltas.size());
    std::iota(keep.begin(), keep.end(), 0);
  }

  std::vector<double> x, y;
  for (auto i : keep) {
    x.push_back(std::log(1.0 / curve.deltas[i]));
    y.push_back(std::log(static_cast<double>(curve.counts[i])));
  }
  if (std::all_of(y.begin(), y.end(), [&](double v) { return v == y.front(); })) {
    throw DegenerateRange("box counts are flat over the fit range");
  }
  const LinearFit fit = least_squares(x, y);
  DimensionEstimate est;
  est.exponent = fit.slope;
  est.intercept = fit.intercept;
  est.r_squared = fit.r_squared;
  est.n_points_used = static_cast<int>(keep.size());
  est.delta_min = curve.deltas[keep.front()];
  est.delta_max = curve.deltas[keep.front()];
  for (auto i : keep) {
    est.delta_min = std::min(est.delta_min, curve.deltas[i]);
    est.delta_max = std::max(est.delta_max, curve.deltas[i]);
  }
  return est;
}

DimensionEstimate estimate_parabolic_dimension(const GraphCloud& cloud, std::span<const double> deltas,
                                               double hurst, const FitOptions& fit,
                                               const BoxCountOptions& boxes) {
  return fit_box_dimension(box_count_curve(cloud, deltas, hurst, boxes), fit);
}

double energy_integral_mc(const WeightedTimeSet& measure, const Eigen::MatrixXd& values, double gamma,
                          double hurst, const EnergyOptions& options) {
  measure.validate(1e-9);
  const std::size_t n = measure.size();
  if (n < 2) throw DomainError("energy integral needs at least two points");
  if (static_cast<std::size_t>(values.rows()) != n) throw DomainError("energy integral: values length mismatch");
  if (!(gamma > 0.0)) throw DomainError("energy integral: gamma must be positive");
  if (!(hurst > 0.0 && hurst < 1.0)) throw DomainError("energy integral: H must lie in (0,1)");
  const double power = -gamma / hurst;
  const auto& t = measure.times;
  const auto& w = measure.weights;

  auto kernel = [&](std::size_t i, std::size_t j) {
    const double r = rho_h(t[i], values.row(static_cast<Eigen::Index>(i)).transpose(), t[j],
                           values.row(static_cast<Eigen::Index>(j)).transpose(), hurst);
    if (r == 0.0) throw DomainError("energy integral: coincident points off the diagonal");
    return std::pow(r, power);
  };

  if (n <= options.exact_limit) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double row = 0.0;
      for (std::size_t j = i + 1; j < n; ++j) row += w[j] * kernel(i, j);
      total += w[i] * row;
    }
    return 2.0 * total;
  }

  // Pairs drawn i ~ w, j ~ w, conditioned on i != j.
  std::vector<double> cdf(n);
  std::partial_sum(w.begin(), w.end(), cdf.begin());
  const double off_diagonal =
      1.0 - std::inner_product(w.begin(), w.end(), w.begin(), 0.0);
  const NormalStream stream(options.seed, StreamId{0xe9u, 0});
  auto draw = [&](std::uint64_t k) {
    const double u = stream.uniform(k) * cdf.back();
    return std::min<std::size_t>(n - 1, static_cast<std::size_t>(
                                            std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin()));
  };
  double total = 0.0;
  std::size_t accepted = 0;
  std::uint64_t k = 0;
  while (accepted < options.sampled_pairs) {
    const std::size_t i = draw(k++);
    const std::size_t j = draw(k++);
    if (i == j) continue;
    total += kernel(i, j);
    ++accepted;
  }
  return off_diagonal * total / static_cast<double>(accepted);
}

double kernel_expectation_mc(double t, double alpha, double hurst, double gamma, int d, std::size_t n,
                             std::uint64_t seed, const KernelOptions& options) {
  if (!(t > 0.0 && t <= 1.0)) throw DomainError("kernel expectation: t must lie in (0,1]");
  if (!(alpha > 0.0 && alpha < 1.0) || !(hurst > 0.0 && hurst < 1.0)) {
    throw DomainError("kernel expectation: Hurst indices must lie in (0,1)");
  }
  if (alpha > hurst) throw AlphaExceedsH("kernel expectation: alpha must not exceed H");
  if (d < 1 || n == 0) throw DomainError("kernel expectation: need d >= 1 and n >= 1");
  if (std::abs(gamma - hurst * d) < options.boundary_margin) {
    throw GammaAtBoundary("kernel expectation: gamma too close to H d");
  }
  const double floor_term = std::pow(t, hurst);
  const double scale = std::pow(t, alpha);
  const double power = -gamma / hurst;
  const NormalStream stream(seed, StreamId{0x6bu, 0});
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double norm = 0.0;
    for (int j = 0; j < d; ++j) {
      norm = std::max(norm, std::abs(stream.normal(i * static_cast<std::size_t>(d) + static_cast<std::size_t>(j))));
    }
    total += std::pow(std::max(floor_term, scale * norm), power);
  }
  return total / static_cast<double>(n);
}

}  // namespace fbmlab
