#include <doctest.h>

#include <cmath>
#include <vector>

#include "fbmlab/fbm.hpp"

using namespace fbmlab;

namespace {

// Mean and standard error of x^2 over seeds at each grid index.
struct Moments {
  std::vector<double> mean;
  std::vector<double> se;
};

template <typename F>
Moments second_moments(F&& sample, int seeds, Eigen::Index n) {
  std::vector<double> s1(n, 0.0), s2(n, 0.0);
  for (int s = 0; s < seeds; ++s) {
    const Eigen::VectorXd x = sample(static_cast<std::uint64_t>(s));
    for (Eigen::Index i = 0; i < n; ++i) {
      const double v = x[i] * x[i];
      s1[i] += v;
      s2[i] += v * v;
    }
  }
  Moments m{std::vector<double>(n), std::vector<double>(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    m.mean[i] = s1[i] / seeds;
    m.se[i] = std::sqrt((s2[i] / seeds - m.mean[i] * m.mean[i]) / seeds);
  }
  return m;
}

}  // namespace

TEST_CASE("paths start at zero and replay bit-identically") {
  const auto grid = TimeGrid::uniform(256);
  for (double h : {0.2, 0.5, 0.8}) {
    const auto a = generate_fbm_path(HurstIndex(h), grid, 3, 17);
    const auto b = generate_fbm_path(HurstIndex(h), grid, 3, 17);
    CHECK(a.values.row(0).isZero(0.0));
    CHECK(a.values == b.values);
    CHECK(a.sampler == SamplerKind::circulant);
    CHECK(a.values != generate_fbm_path(HurstIndex(h), grid, 3, 18).values);
  }
}

TEST_CASE("coordinates are reproducible independently of d") {
  const auto grid = TimeGrid::uniform(64);
  const auto one = generate_fbm_path(HurstIndex(0.4), grid, 1, 3);
  const auto three = generate_fbm_path(HurstIndex(0.4), grid, 3, 3);
  CHECK(one.values.col(0) == three.values.col(0));
  CHECK(three.values.col(1) != three.values.col(0));
}

TEST_CASE("empirical variance matches t^{2H} within 3 standard errors (Cholesky)") {
  const auto grid = TimeGrid::uniform(16);
  SamplerOptions opts;
  opts.kind = SamplerKind::cholesky;
  for (double h : {0.2, 0.5, 0.8}) {
    const FbmGenerator gen(HurstIndex(h), grid, opts);
    const auto m = second_moments([&](std::uint64_t s) { return Eigen::VectorXd(gen.generate(1, s).values.col(0)); },
                                  10000, 17);
    for (int i = 1; i <= 16; ++i) {
      const double target = std::pow(grid[i], 2 * h);
      CHECK(std::abs(m.mean[i] - target) <= 3.0 * m.se[i]);
    }
  }
}

TEST_CASE("circulant and dense samplers produce the same law") {
  const auto grid = TimeGrid::uniform(32);
  SamplerOptions circ;
  circ.kind = SamplerKind::circulant;
  for (double h : {0.3, 0.7}) {
    const FbmGenerator gen(HurstIndex(h), grid, circ);
    const auto m = second_moments([&](std::uint64_t s) { return Eigen::VectorXd(gen.generate(1, s).values.col(0)); },
                                  10000, 33);
    for (int i : {1, 8, 16, 32}) {
      CHECK(std::abs(m.mean[i] - std::pow(grid[i], 2 * h)) <= 3.5 * m.se[i]);
    }
  }
}

TEST_CASE("H=0.5 increments over disjoint intervals are uncorrelated") {
  const auto grid = TimeGrid::uniform(8);
  const FbmGenerator gen(HurstIndex(0.5), grid);
  const int n = 10000;
  double sxy = 0.0, sxy2 = 0.0;
  for (int s = 0; s < n; ++s) {
    const auto p = gen.generate(1, static_cast<std::uint64_t>(s)).values;
    const double x = p(2, 0) - p(0, 0);
    const double y = p(7, 0) - p(4, 0);
    sxy += x * y;
    sxy2 += x * y * x * y;
  }
  const double mean = sxy / n;
  const double se = std::sqrt((sxy2 / n - mean * mean) / n);
  CHECK(std::abs(mean) <= 3.0 * se);
}

TEST_CASE("arbitrary grids use the dense sampler, with or without 0") {
  const TimeGrid with_zero({0.0, 0.1, 0.15, 0.6, 1.0});
  const TimeGrid without_zero({0.1, 0.15, 0.6, 1.0});
  const auto a = generate_fbm_path(HurstIndex(0.6), with_zero, 2, 1);
  const auto b = generate_fbm_path(HurstIndex(0.6), without_zero, 2, 1);
  CHECK(a.sampler == SamplerKind::cholesky);
  CHECK(a.values.row(0).isZero(0.0));
  CHECK(b.size() == 4);
  SamplerOptions circ;
  circ.kind = SamplerKind::circulant;
  CHECK_THROWS_AS(generate_fbm_path(HurstIndex(0.6), with_zero, 1, 1, circ), DomainError);
  SamplerOptions tiny;
  tiny.kind = SamplerKind::cholesky;
  tiny.cholesky_limit = 8;
  CHECK_THROWS_AS(generate_fbm_path(HurstIndex(0.6), TimeGrid::uniform(64), 1, 1, tiny), CovarianceNotPSD);
}

TEST_CASE("empirical variance on a non-anchored grid") {
  const TimeGrid grid({0.2, 0.45, 0.5, 1.0});
  const FbmGenerator gen(HurstIndex(0.3), grid);
  const auto m = second_moments([&](std::uint64_t s) { return Eigen::VectorXd(gen.generate(1, s).values.col(0)); },
                                10000, 4);
  for (int i = 0; i < 4; ++i) CHECK(std::abs(m.mean[i] - std::pow(grid[i], 0.6)) <= 3.0 * m.se[i]);
}

TEST_CASE("mixed process: Z(0)=0, increment variance, and alpha'=H doubling") {
  const auto grid = TimeGrid::uniform(16);
  const auto z = generate_mixed_path(HurstIndex(0.7), HurstIndex(0.3), grid, 2, {1, 2});
  CHECK(z.values.row(0).isZero(0.0));
  CHECK(z.hurst_components.size() == 2);

  const int n = 10000;
  std::vector<double> s1(3, 0.0), s2(3, 0.0);
  const int a[3] = {4, 1, 0};
  const int b[3] = {12, 16, 16};
  for (int s = 0; s < n; ++s) {
    const auto p = generate_mixed_path(HurstIndex(0.7), HurstIndex(0.3), grid, 1,
                                       {static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(s + 100000)});
    for (int k = 0; k < 3; ++k) {
      const double inc = p.values(b[k], 0) - p.values(a[k], 0);
      s1[k] += inc * inc;
      s2[k] += inc * inc * inc * inc;
    }
  }
  for (int k = 0; k < 3; ++k) {
    const double gap = grid[b[k]] - grid[a[k]];
    const double target = std::pow(gap, 1.4) + std::pow(gap, 0.6);
    const double mean = s1[k] / n;
    const double se = std::sqrt((s2[k] / n - mean * mean) / n);
    CHECK(std::abs(mean - target) <= 3.0 * se);
  }

  double v = 0.0, v2 = 0.0;
  for (int s = 0; s < n; ++s) {
    const auto p = generate_mixed_path(HurstIndex(0.6), HurstIndex(0.6), grid, 1,
                                       {static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(s + 7777777)});
    const double x = p.values(8, 0);
    v += x * x;
    v2 += x * x * x * x;
  }
  const double mean = v / n;
  const double se = std::sqrt((v2 / n - mean * mean) / n);
  CHECK(std::abs(mean - 2.0 * std::pow(0.5, 1.2)) <= 3.0 * se);
}

TEST_CASE("add_paths rejects mismatched grids") {
  const auto a = generate_fbm_path(HurstIndex(0.5), TimeGrid::uniform(8), 1, 1);
  const auto b = generate_fbm_path(HurstIndex(0.5), TimeGrid::uniform(16), 1, 1);
  CHECK_THROWS_AS(add_paths(a, b), GridMismatch);
  const auto c = add_paths(a, a);
  CHECK(c.values.isApprox(2.0 * a.values));
}
