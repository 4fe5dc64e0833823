#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fbmlab/core.hpp"

namespace fbmlab {

enum class KernelKind { fbm, mixed };

/// Finite Gaussian vector (X(t_1), ..., X(t_n)) for X = B^H or X = B^H + B^{alpha'}.
struct GaussianVectorSpec {
  std::vector<double> times;
  KernelKind kernel = KernelKind::fbm;
  double hurst = 0.5;
  double alpha_p = 0.5;
  Eigen::MatrixXd covariance;

  static GaussianVectorSpec fbm(std::vector<double> times, HurstIndex hurst);
  static GaussianVectorSpec mixed(std::vector<double> times, HurstIndex hurst, HurstIndex alpha_p);

  Eigen::Index size() const noexcept { return covariance.rows(); }
};

/// Var(X_target | X_given) via the Schur complement. The given block is
/// factorized with LDLT; a pivot below 1e-12 * trace raises SingularConditioning.
double conditional_variance(const GaussianVectorSpec& spec, Eigen::Index target,
                            std::span<const Eigen::Index> given);

struct DetChain {
  double det = 0.0;
  double chain_product = 0.0;
};

/// Determinant by LU against Var(X_1) * prod_k Var(X_k | X_1..X_{k-1}).
DetChain detcov_chain_identity(const GaussianVectorSpec& spec);

/// det Cov(B(t_1..t_p)) / prod_j min_{0<=i<j} |t_j - t_i|^{2H}, with t_0 = 0
/// and the times taken in ascending order.
double verify_detcov_lower_bound(std::span<const double> times, HurstIndex hurst);

/// Var(Z(u) | Z(t_1..t_n)) / [min_k |u-t_k|^{2 alpha'} + min_k |u-t_k|^{2H}]
/// for Z = B^H + B^{alpha'}, with t_0 = 0 in both minima.
double lnd_margin(HurstIndex hurst, HurstIndex alpha_p, double u, std::span<const double> conditioning_times);

/// E(Z(t) - Z(s))^2 = |t-s|^{2H} + |t-s|^{2 alpha'}.
double mixed_increment_variance(double s, double t, HurstIndex hurst, HurstIndex alpha_p);

}  // namespace fbmlab
