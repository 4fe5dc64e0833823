#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "fbmlab/gaussian.hpp"
#include "fbmlab/random.hpp"

using namespace fbmlab;

namespace {
std::vector<double> random_times(const NormalStream& rng, std::uint64_t& k, int n, double lo) {
  std::vector<double> t;
  while (static_cast<int>(t.size()) < n) {
    const double v = lo + (1.0 - lo) * rng.uniform(k++);
    if (std::find(t.begin(), t.end(), v) == t.end()) t.push_back(v);
  }
  return t;
}
}  // namespace

TEST_CASE("conditional variance examples") {
  const auto s = GaussianVectorSpec::fbm({0.5, 1.0}, HurstIndex(0.5));
  const std::vector<Eigen::Index> none;
  CHECK(conditional_variance(s, 1, none) == doctest::Approx(1.0));
  const std::vector<Eigen::Index> first{0};
  CHECK(conditional_variance(s, 1, first) == doctest::Approx(0.5));
  const auto q = GaussianVectorSpec::fbm({0.5, 1.0}, HurstIndex(0.25));
  CHECK(conditional_variance(q, 1, first) == doctest::Approx(1.0 - 0.25 / std::sqrt(0.5)).epsilon(1e-12));
  CHECK(conditional_variance(q, 1, first) == doctest::Approx(0.64645).epsilon(1e-5));
  CHECK(conditional_variance(GaussianVectorSpec::fbm({0.3}, HurstIndex(0.7)), 0, none) ==
        doctest::Approx(std::pow(0.3, 1.4)));
}

TEST_CASE("conditioning on a duplicated time is singular") {
  const auto s = GaussianVectorSpec::fbm({0.4, 0.4, 0.9}, HurstIndex(0.5));
  const std::vector<Eigen::Index> dup{0, 1};
  CHECK_THROWS_AS(conditional_variance(s, 2, dup), SingularConditioning);
  CHECK_THROWS_AS(GaussianVectorSpec::fbm({0.0, 0.5}, HurstIndex(0.5)), DomainError);
}

TEST_CASE("property: conditional variance decreases along nested conditioning sets") {
  const NormalStream rng(3, {0, 0});
  std::uint64_t k = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const double h = 0.1 + 0.8 * rng.uniform(k++);
    const auto spec = GaussianVectorSpec::fbm(random_times(rng, k, 7, 0.05), HurstIndex(h));
    std::vector<Eigen::Index> given;
    double prev = conditional_variance(spec, 0, given);
    REQUIRE(prev == doctest::Approx(spec.covariance(0, 0)));
    for (Eigen::Index j = 1; j < 7; ++j) {
      given.push_back(j);
      const double v = conditional_variance(spec, 0, given);
      REQUIRE(v >= 0.0);
      REQUIRE(v <= prev * (1 + 1e-10) + 1e-14);
      prev = v;
    }
  }
}

TEST_CASE("determinant chain identity") {
  const auto one = detcov_chain_identity(GaussianVectorSpec::fbm({0.6}, HurstIndex(0.3)));
  CHECK(one.det == doctest::Approx(std::pow(0.6, 0.6)));
  CHECK(one.chain_product == doctest::Approx(std::pow(0.6, 0.6)));
  const auto bm = detcov_chain_identity(GaussianVectorSpec::fbm({0.5, 1.0}, HurstIndex(0.5)));
  CHECK(bm.det == doctest::Approx(0.25));
  CHECK(bm.chain_product == doctest::Approx(0.25));

  const NormalStream rng(8, {0, 0});
  std::uint64_t k = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    const int n = 1 + trial % 8;
    const double h = 0.1 + 0.8 * rng.uniform(k++);
    auto times = random_times(rng, k, n, 0.0);
    const auto spec = trial % 2 ? GaussianVectorSpec::fbm(times, HurstIndex(h))
                                : GaussianVectorSpec::mixed(times, HurstIndex(h), HurstIndex(h * 0.5));
    const auto r = detcov_chain_identity(spec);
    const double cond = spec.covariance.norm() * spec.covariance.inverse().norm();
    if (cond > 1e6) continue;
    REQUIRE(std::abs(r.det - r.chain_product) <= 1e-8 * std::abs(r.det));
  }
}

TEST_CASE("determinant lower bound: exact cases and the H != 1/2 deficit") {
  const std::vector<double> t{0.5, 1.0};
  CHECK(verify_detcov_lower_bound(t, HurstIndex(0.5)) == doctest::Approx(1.0));
  CHECK(verify_detcov_lower_bound(std::vector<double>{0.37}, HurstIndex(0.8)) == doctest::Approx(1.0));
  const std::vector<double> reversed{1.0, 0.5};
  CHECK(verify_detcov_lower_bound(reversed, HurstIndex(0.5)) == doctest::Approx(1.0));

  // H = 0.8, times (0.5, 1): det = 0.5^{1.6} - 1/4, bound = 0.5^{3.2}.
  const double det = std::pow(0.5, 1.6) - 0.25;
  CHECK(verify_detcov_lower_bound(t, HurstIndex(0.8)) == doctest::Approx(det / std::pow(0.5, 3.2)).epsilon(1e-12));
  CHECK(verify_detcov_lower_bound(t, HurstIndex(0.8)) < 1.0);

  const NormalStream rng(4, {0, 0});
  std::uint64_t k = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    const auto times = random_times(rng, k, 1 + trial % 5, 0.0);
    REQUIRE(verify_detcov_lower_bound(times, HurstIndex(0.5)) == doctest::Approx(1.0).epsilon(1e-9));
    for (double h : {0.2, 0.8}) REQUIRE(verify_detcov_lower_bound(times, HurstIndex(h)) > 0.0);
  }
  CHECK_THROWS_AS(verify_detcov_lower_bound(std::vector<double>{0.5, 0.5}, HurstIndex(0.5)), DomainError);
}

TEST_CASE("local nondeterminism ratio") {
  const std::vector<double> none;
  for (double u : {0.1, 0.5, 1.0}) CHECK(lnd_margin(HurstIndex(0.7), HurstIndex(0.3), u, none) == doctest::Approx(1.0));

  // alpha' = H: Z is sqrt(2) B^H in law.
  const std::vector<double> cond{0.2, 0.45, 0.9};
  const double h = 0.6;
  const auto fbm = GaussianVectorSpec::fbm({0.5, 0.2, 0.45, 0.9}, HurstIndex(h));
  const std::vector<Eigen::Index> given{1, 2, 3};
  const double expect = 2.0 * conditional_variance(fbm, 0, given) / (2.0 * std::pow(0.05, 2 * h));
  CHECK(lnd_margin(HurstIndex(h), HurstIndex(h), 0.5, cond) == doctest::Approx(expect).epsilon(1e-10));
  CHECK(expect > 0.0);

  const NormalStream rng(6, {0, 0});
  std::uint64_t k = 0;
  double inf = 1e300;
  for (int trial = 0; trial < 2000; ++trial) {
    auto times = random_times(rng, k, 1 + trial % 7, 0.1);
    const double u = times.back();
    times.pop_back();
    inf = std::min(inf, lnd_margin(HurstIndex(0.8), HurstIndex(0.3), u, times));
  }
  CHECK(inf > 0.0);
  CHECK_THROWS_AS(lnd_margin(HurstIndex(0.8), HurstIndex(0.3), 0.5, std::vector<double>{0.5}), DomainError);
}

TEST_CASE("mixed increment variance") {
  CHECK(mixed_increment_variance(0.4, 0.4, HurstIndex(0.6), HurstIndex(0.3)) == 0.0);
  CHECK(mixed_increment_variance(0.0, 1.0, HurstIndex(0.6), HurstIndex(0.3)) == doctest::Approx(2.0));
  const double v = mixed_increment_variance(0.2, 0.7, HurstIndex(0.6), HurstIndex(0.3));
  CHECK(v == doctest::Approx(1.09503).epsilon(1e-5));
  CHECK(v >= std::pow(0.5, 0.6));
  CHECK(v <= 2 * std::pow(0.5, 0.6));
  CHECK_THROWS_AS(mixed_increment_variance(0.2, 0.7, HurstIndex(0.3), HurstIndex(0.6)), AlphaExceedsH);
}
