#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "fbmlab/estimators.hpp"
#include "fbmlab/parabolic.hpp"

using namespace fbmlab;

namespace {

GraphCloud cloud_of(std::vector<double> t, Eigen::MatrixXd v) {
  GraphCloud c;
  c.times = Eigen::Map<Eigen::VectorXd>(t.data(), static_cast<Eigen::Index>(t.size()));
  c.values = std::move(v);
  return c;
}

GraphCloud function_graph(std::size_t n_steps, double (*f)(double), bool polyline) {
  SamplePath p;
  p.grid = TimeGrid::uniform(n_steps);
  p.values.resize(static_cast<Eigen::Index>(p.grid.size()), 1);
  for (std::size_t i = 0; i < p.grid.size(); ++i) p.values(static_cast<Eigen::Index>(i), 0) = f(p.grid[i]);
  return graph_of_path(p, {}, polyline, GraphSource::function_graph);
}

// Brute force: collect distinct anchored cells of every point.
std::size_t brute_force_count(const GraphCloud& c, double delta, double hurst) {
  const double side = std::pow(delta, hurst);
  const Eigen::RowVectorXd lo = c.values.colwise().minCoeff();
  std::vector<std::vector<long long>> cells;
  const long long last = static_cast<long long>(std::ceil(1.0 / delta - 1e-12)) - 1;
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    std::vector<long long> cell{std::min(last, static_cast<long long>(std::floor(c.times[i] / delta)))};
    for (Eigen::Index j = 0; j < c.dim(); ++j) {
      cell.push_back(static_cast<long long>(std::floor((c.values(i, j) - lo[j]) / side)));
    }
    cells.push_back(cell);
  }
  std::sort(cells.begin(), cells.end());
  return static_cast<std::size_t>(std::unique(cells.begin(), cells.end()) - cells.begin());
}

}  // namespace

TEST_CASE("box count examples") {
  CHECK(parabolic_box_count(cloud_of({0.4}, Eigen::MatrixXd::Constant(1, 1, 2.0)), 0.25, 0.5) == 1);
  Eigen::MatrixXd two(2, 1);
  two << 0.0, 0.9;
  CHECK(parabolic_box_count(cloud_of({0.1, 0.8}, two), 0.25, 0.5) == 2);
  for (double h : {0.2, 0.5, 0.9}) {
    CHECK(parabolic_box_count(function_graph(1024, [](double) { return 0.0; }, false), 0.25, h) == 4);
    CHECK(parabolic_box_count(function_graph(1024, [](double) { return 0.0; }, true), 0.25, h) == 4);
  }
}

TEST_CASE("point-only counts match brute force and respect the point bound") {
  const auto grid = TimeGrid::uniform(2048);
  for (int d = 1; d <= 3; ++d) {
    const auto path = generate_fbm_path(HurstIndex(0.4), grid, d, static_cast<std::uint64_t>(d));
    const auto cloud = graph_of_path(path, {}, false);
    for (double delta : dyadic_scales(1, 11)) {
      const auto n = parabolic_box_count(cloud, delta, 0.6);
      REQUIRE(n == brute_force_count(cloud, delta, 0.6));
      REQUIRE(n >= 1);
      REQUIRE(n <= static_cast<std::size_t>(cloud.size()));
    }
  }
}

TEST_CASE("polyline counts dominate point counts and stay within the range bound") {
  const auto grid = TimeGrid::uniform(1024);
  const auto path = generate_fbm_path(HurstIndex(0.3), grid, 2, 4);
  const auto pts = graph_of_path(path, {}, false);
  const auto line = graph_of_path(path, {}, true);
  for (double delta : dyadic_scales(2, 10)) {
    const auto a = parabolic_box_count(pts, delta, 0.7);
    const auto b = parabolic_box_count(line, delta, 0.7);
    CHECK(b >= a);
    const double side = std::pow(delta, 0.7);
    const Eigen::RowVectorXd range = path.values.colwise().maxCoeff() - path.values.colwise().minCoeff();
    double bound = std::ceil(1.0 / delta);
    for (int j = 0; j < 2; ++j) bound *= range[j] / side + 1.0;
    CHECK(static_cast<double>(b) <= bound);
  }
}

TEST_CASE("a linked segment crossing many cells is counted cell by cell") {
  GraphCloud c = cloud_of({0.0, 1.0}, (Eigen::MatrixXd(2, 1) << 0.0, 1.0).finished());
  c.links = {1};
  // y = t at delta = 1/4, H = 1/2: four cells along the segment, plus the
  // endpoint (1, 1), which sits on the lower edge of the third row.
  CHECK(parabolic_box_count(c, 0.25, 0.5) == 5);
  c.links = {0};
  CHECK(parabolic_box_count(c, 0.25, 0.5) == 2);
}

TEST_CASE("flat graph exponent is 1 for every H") {
  const auto cloud = function_graph(1 << 14, [](double) { return 0.0; }, true);
  for (double h : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    const auto est = estimate_parabolic_dimension(cloud, dyadic_scales(2, 12), h);
    CHECK(est.exponent == doctest::Approx(1.0).epsilon(0.02));
    CHECK(est.r_squared >= 0.0);
    CHECK(est.r_squared <= 1.0);
  }
}

TEST_CASE("Lipschitz graph exponent is 1 within 0.05") {
  const auto cloud = function_graph(1 << 14, [](double t) { return t; }, true);
  const auto est = estimate_parabolic_dimension(cloud, dyadic_scales(2, 12), 0.5);
  CHECK(est.exponent == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("fBm graph with alpha = H has exponent 1 within 0.1 (median over 20 seeds)") {
  const auto grid = TimeGrid::uniform(1 << 14);
  for (double h : {0.3, 0.7}) {
    const FbmGenerator gen(HurstIndex(h), grid);
    std::vector<double> e;
    for (std::uint64_t s = 0; s < 20; ++s) {
      e.push_back(estimate_parabolic_dimension(graph_of_path(gen.generate(1, s), {}, true), dyadic_scales(2, 12), h)
                      .exponent);
    }
    std::nth_element(e.begin(), e.begin() + 10, e.end());
    CHECK(std::abs(e[10] - 1.0) <= 0.1);
  }
}

TEST_CASE("property: counts are monotone in dyadic delta and grow by a bounded factor") {
  const auto grid = TimeGrid::uniform(4096);
  for (int d = 1; d <= 2; ++d) {
    for (std::uint64_t s = 0; s < 10; ++s) {
      const auto path = generate_fbm_path(HurstIndex(0.2 + 0.06 * static_cast<double>(s)), grid, d, s);
      for (bool polyline : {false, true}) {
        const auto curve = box_count_curve(graph_of_path(path, {}, polyline), dyadic_scales(0, 12), 0.5);
        for (std::size_t k = 1; k < curve.counts.size(); ++k) {
          REQUIRE(curve.counts[k] >= curve.counts[k - 1]);
          REQUIRE(curve.counts[k] <= static_cast<std::size_t>(std::pow(4.0, d + 1)) * curve.counts[k - 1]);
        }
      }
    }
  }
}

TEST_CASE("property: graphs over nested time sets give nested counts") {
  const auto grid = TimeGrid::uniform(std::size_t{1} << 12);
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto path = generate_fbm_path(HurstIndex(0.6), grid, 2, 40 + s);
    std::vector<std::vector<std::size_t>> nested{{}};
    for (int g = 2; g <= 6; g += 2) nested.push_back(grid_indices_in(middle_thirds_cantor(g), grid));
    std::vector<BoxCountCurve> curves;
    for (const auto& idx : nested) curves.push_back(box_count_curve(graph_of_path(path, idx, true), dyadic_scales(2, 10), 0.6));
    for (std::size_t k = 1; k < curves.size(); ++k) {
      for (std::size_t j = 0; j < curves[k].counts.size(); ++j) {
        // Value axes are re-anchored at the subset minimum, so each old box meets at most 2^d new ones.
        CHECK(curves[k].counts[j] <= 4 * curves[k - 1].counts[j]);
      }
    }
  }
}

TEST_CASE("anchor shift changes counts only mildly") {
  const auto path = generate_fbm_path(HurstIndex(0.5), TimeGrid::uniform(1 << 12), 1, 3);
  const auto cloud = graph_of_path(path, {}, true);
  BoxCountOptions shifted;
  shifted.anchor_shift = 0.5;
  const auto a = estimate_parabolic_dimension(cloud, dyadic_scales(2, 10), 0.5);
  const auto b = estimate_parabolic_dimension(cloud, dyadic_scales(2, 10), 0.5, {}, shifted);
  CHECK(std::abs(a.exponent - b.exponent) < 0.05);
}

TEST_CASE("fit preconditions") {
  BoxCountCurve flat{{0.5, 0.25, 0.125, 0.0625}, {3, 3, 3, 3}};
  CHECK_THROWS_AS(fit_box_dimension(flat), DegenerateRange);
  BoxCountCurve short_curve{{0.5, 0.25, 0.125}, {1, 2, 4}};
  CHECK_THROWS_AS(fit_box_dimension(short_curve), DomainError);
  BoxCountCurve narrow{{0.5, 0.45, 0.4, 0.35}, {1, 2, 3, 4}};
  CHECK_THROWS_AS(fit_box_dimension(narrow), DomainError);
  BoxCountCurve exact{{0.5, 0.25, 0.125, 0.0625, 0.03125}, {2, 8, 32, 128, 512}};
  const auto e = fit_box_dimension(exact);
  CHECK(e.exponent == doctest::Approx(2.0));
  CHECK(e.r_squared == doctest::Approx(1.0));
  CHECK(e.delta_max == doctest::Approx(0.25));
  CHECK(e.delta_min == doctest::Approx(0.0625));
  CHECK(e.n_points_used == 3);
}

TEST_CASE("least squares recovers a line") {
  const std::vector<double> x{0, 1, 2, 3};
  const std::vector<double> y{1, 3, 5, 7};
  const auto f = least_squares(x, y);
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.r_squared == doctest::Approx(1.0));
}

TEST_CASE("energy integral examples") {
  WeightedTimeSet m{{0.0, 1.0}, {0.5, 0.5}};
  const Eigen::MatrixXd v = Eigen::MatrixXd::Zero(2, 1);
  for (double g : {0.3, 1.0, 2.5}) CHECK(energy_integral_mc(m, v, g, 0.5) == doctest::Approx(0.5));

  WeightedTimeSet same{{0.5, 0.5}, {0.5, 0.5}};
  CHECK_THROWS_AS(energy_integral_mc(same, v, 1.0, 0.5), DomainError);
}

TEST_CASE("energy integral is monotone in gamma, permutation invariant and seed independent when exact") {
  const auto grid = TimeGrid::uniform(512);
  const auto path = generate_fbm_path(HurstIndex(0.5), grid, 1, 2);
  WeightedTimeSet m;
  m.times = grid.times();
  m.weights.assign(grid.size(), 1.0 / static_cast<double>(grid.size()));
  Eigen::MatrixXd v = 0.2 * path.values;  // keeps all rho_H distances below 1

  double prev = 0.0;
  for (double g : {0.1, 0.3, 0.6, 0.9}) {
    const double e = energy_integral_mc(m, v, g, 0.5);
    CHECK(e > prev);
    prev = e;
  }

  std::vector<std::size_t> perm(grid.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::reverse(perm.begin(), perm.end());
  WeightedTimeSet pm;
  Eigen::MatrixXd pv(v.rows(), 1);
  for (std::size_t i = 0; i < perm.size(); ++i) {
    pm.times.push_back(m.times[perm[i]]);
    pm.weights.push_back(m.weights[perm[i]]);
    pv(static_cast<Eigen::Index>(i), 0) = v(static_cast<Eigen::Index>(perm[i]), 0);
  }
  const double a = energy_integral_mc(m, v, 0.6, 0.5);
  CHECK(energy_integral_mc(pm, pv, 0.6, 0.5) == doctest::Approx(a).epsilon(1e-9));
  EnergyOptions other;
  other.seed = 99;
  CHECK(energy_integral_mc(m, v, 0.6, 0.5, other) == a);

  EnergyOptions sampled;
  sampled.exact_limit = 16;
  sampled.sampled_pairs = 400000;
  CHECK(energy_integral_mc(m, v, 0.6, 0.5, sampled) == doctest::Approx(a).epsilon(0.03));
}

TEST_CASE("energy stabilises below the graph dimension and grows above it") {
  // Graph of B^{1/2} at H = 1/2 has parabolic dimension 1.
  auto energy_at = [](std::size_t n_steps, double gamma) {
    const auto grid = TimeGrid::uniform(n_steps);
    const auto path = generate_fbm_path(HurstIndex(0.5), grid, 1, 8);
    WeightedTimeSet m;
    m.times = grid.times();
    m.weights.assign(grid.size(), 1.0 / static_cast<double>(grid.size()));
    return energy_integral_mc(m, path.values, gamma, 0.5);
  };
  const double low_ratio = energy_at(2048, 0.5) / energy_at(512, 0.5);
  const double high_ratio = energy_at(2048, 1.6) / energy_at(512, 1.6);
  CHECK(low_ratio < 1.15);
  CHECK(high_ratio > 1.5);
}

TEST_CASE("kernel expectation") {
  CHECK(kernel_expectation_mc(1.0, 0.5, 0.5, 0.3, 2, 10000, 1) <= 1.0);
  CHECK_THROWS_AS(kernel_expectation_mc(0.5, 0.5, 0.5, 1.0, 2, 100, 1), GammaAtBoundary);
  CHECK_THROWS_AS(kernel_expectation_mc(0.5, 0.6, 0.5, 0.3, 1, 100, 1), AlphaExceedsH);
  CHECK_THROWS_AS(kernel_expectation_mc(0.0, 0.3, 0.5, 0.3, 1, 100, 1), DomainError);
  CHECK(kernel_expectation_mc(0.25, 0.3, 0.6, 0.4, 1, 1000, 5) == kernel_expectation_mc(0.25, 0.3, 0.6, 0.4, 1, 1000, 5));
}

TEST_CASE("kernel slope follows the low-gamma branch") {
  std::vector<double> lt, lv;
  for (int k = 1; k <= 8; ++k) {
    const double t = std::ldexp(1.0, -k);
    lt.push_back(std::log(t));
    lv.push_back(std::log(kernel_expectation_mc(t, 0.6, 0.9, 0.3, 3, 200000, 3)));
  }
  const double theory = -0.3 * 0.6 / 0.9;
  CHECK(std::abs(least_squares(lt, lv).slope - theory) <= 0.05 * std::abs(theory));
}
