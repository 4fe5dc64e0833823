#include "fbmlab/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fbmlab/covariance.hpp"

namespace fbmlab {

namespace {

void check_times(const std::vector<double>& times) {
  if (times.empty()) throw DomainError("Gaussian vector needs at least one time");
  for (double t : times) {
    if (!(t > 0.0 && t <= 1.0)) throw DomainError("times must lie in (0,1]");
  }
}

double pow2h(double x, double h) { return x == 0.0 ? 0.0 : std::pow(std::abs(x), 2.0 * h); }

}  // namespace

GaussianVectorSpec GaussianVectorSpec::fbm(std::vector<double> times, HurstIndex hurst) {
  check_times(times);
  GaussianVectorSpec spec;
  spec.covariance = build_covariance_matrix<double>(times, hurst.value());
  spec.times = std::move(times);
  spec.kernel = KernelKind::fbm;
  spec.hurst = hurst;
  spec.alpha_p = hurst;
  return spec;
}

GaussianVectorSpec GaussianVectorSpec::mixed(std::vector<double> times, HurstIndex hurst, HurstIndex alpha_p) {
  check_times(times);
  GaussianVectorSpec spec;
  spec.covariance = build_mixed_covariance_matrix<double>(times, hurst.value(), alpha_p.value());
  spec.times = std::move(times);
  spec.kernel = KernelKind::mixed;
  spec.hurst = hurst;
  spec.alpha_p = alpha_p;
  return spec;
}

double conditional_variance(const GaussianVectorSpec& spec, Eigen::Index target,
                            std::span<const Eigen::Index> given) {
  const Eigen::Index n = spec.size();
  if (target < 0 || target >= n) throw DomainError("conditional_variance: target index out of range");
  const double prior = spec.covariance(target, target);
  if (given.empty()) return prior;

  const auto m = static_cast<Eigen::Index>(given.size());
  Eigen::MatrixXd block(m, m);
  Eigen::VectorXd cross(m);
  for (Eigen::Index a = 0; a < m; ++a) {
    const Eigen::Index ia = given[static_cast<std::size_t>(a)];
    if (ia < 0 || ia >= n) throw DomainError("conditional_variance: given index out of range");
    cross[a] = spec.covariance(ia, target);
    for (Eigen::Index b = 0; b < m; ++b) {
      block(a, b) = spec.covariance(ia, given[static_cast<std::size_t>(b)]);
    }
  }
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(block);
  const double tol = 1e-12 * block.trace();
  if (ldlt.info() != Eigen::Success || (ldlt.vectorD().array() <= tol).any()) {
    throw SingularConditioning("conditioning covariance is numerically singular");
  }
  const double reduction = cross.dot(ldlt.solve(cross));
  return std::clamp(prior - reduction, 0.0, prior);
}

DetChain detcov_chain_identity(const GaussianVectorSpec& spec) {
  const Eigen::Index n = spec.size();
  if (n < 1) throw DomainError("detcov_chain_identity: empty spec");
  DetChain out;
  out.det = spec.covariance.partialPivLu().determinant();
  std::vector<Eigen::Index> given;
  out.chain_product = 1.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    out.chain_product *= conditional_variance(spec, k, given);
    given.push_back(k);
  }
  return out;
}

double verify_detcov_lower_bound(std::span<const double> times, HurstIndex hurst) {
  std::vector<double> sorted(times.begin(), times.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw DomainError("verify_detcov_lower_bound: times must be distinct");
  }
  const auto spec = GaussianVectorSpec::fbm(sorted, hurst);
  const double det = spec.covariance.partialPivLu().determinant();
  if (!(det > 0.0)) throw SingularConditioning("covariance determinant is not positive");
  double bound = 1.0;
  for (std::size_t j = 0; j < sorted.size(); ++j) {
    double gap = sorted[j];  // distance to t_0 = 0
    for (std::size_t i = 0; i < j; ++i) gap = std::min(gap, sorted[j] - sorted[i]);
    bound *= pow2h(gap, hurst);
  }
  return det / bound;
}

double lnd_margin(HurstIndex hurst, HurstIndex alpha_p, double u, std::span<const double> conditioning_times) {
  std::vector<double> times{u};
  times.insert(times.end(), conditioning_times.begin(), conditioning_times.end());
  double gap = u;
  for (double t : conditioning_times) {
    if (t == u) throw DomainError("lnd_margin: u coincides with a conditioning time");
    gap = std::min(gap, std::abs(u - t));
  }
  const auto spec = GaussianVectorSpec::mixed(std::move(times), hurst, alpha_p);
  std::vector<Eigen::Index> given;
  for (Eigen::Index k = 1; k < spec.size(); ++k) given.push_back(k);
  const double var = conditional_variance(spec, 0, given);
  return var / (pow2h(gap, alpha_p) + pow2h(gap, hurst));
}

double mixed_increment_variance(double s, double t, HurstIndex hurst, HurstIndex alpha_p) {
  if (alpha_p.value() > hurst.value()) throw AlphaExceedsH("alpha' must not exceed H");
  const double gap = std::abs(t - s);
  if (gap > 1.0) throw DomainError("mixed_increment_variance: |t-s| must be at most 1");
  return pow2h(gap, hurst) + pow2h(gap, alpha_p);
}

}  // namespace fbmlab
