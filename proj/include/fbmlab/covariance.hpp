#pragma once

#include <cmath>
#include <span>

#include <Eigen/Dense>

#include "fbmlab/core.hpp"

namespace fbmlab {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

namespace detail {
// |x|^{2H} with 0^{2H} = 0.
template <typename Scalar>
Scalar abs_pow2h(Scalar x, Scalar hurst) {
  using std::abs;
  using std::pow;
  const Scalar a = abs(x);
  return a == Scalar(0) ? Scalar(0) : pow(a, Scalar(2) * hurst);
}
}  // namespace detail

/// E[B(s)B(t)] = (|t|^{2H} + |s|^{2H} - |t-s|^{2H}) / 2.
template <typename Scalar>
Scalar fbm_covariance(Scalar s, Scalar t, Scalar hurst) {
  using std::expm1;
  using std::log1p;
  using std::pow;
  if (s < Scalar(0) || t < Scalar(0)) throw DomainError("fbm_covariance: times must be non-negative");
  const Scalar lo = s < t ? s : t;
  const Scalar hi = s < t ? t : s;
  if (lo == Scalar(0)) return Scalar(0);
  const Scalar two_h = Scalar(2) * hurst;
  if (lo >= Scalar(0.5) * hi) {
    return Scalar(0.5) * (pow(lo, two_h) + pow(hi, two_h) - detail::abs_pow2h(hi - lo, hurst));
  }
  // hi^{2H} - (hi-lo)^{2H} rewritten to avoid cancellation when lo << hi.
  return Scalar(0.5) * (pow(lo, two_h) - pow(hi, two_h) * expm1(two_h * log1p(-lo / hi)));
}

/// Covariance of Z0 = B^H + B^{alpha'} with independent components.
template <typename Scalar>
Scalar mixed_covariance(Scalar s, Scalar t, Scalar hurst, Scalar alpha_p) {
  return fbm_covariance(s, t, hurst) + fbm_covariance(s, t, alpha_p);
}

/// Covariance of the increments B(t_i)-B(t_{i-1}) and B(t_j)-B(t_{j-1}).
template <typename Scalar>
Scalar fbm_increment_covariance(Scalar t_i0, Scalar t_i1, Scalar t_j0, Scalar t_j1, Scalar hurst) {
  using detail::abs_pow2h;
  return Scalar(0.5) * (abs_pow2h(t_i1 - t_j0, hurst) + abs_pow2h(t_i0 - t_j1, hurst) -
                        abs_pow2h(t_i1 - t_j1, hurst) - abs_pow2h(t_i0 - t_j0, hurst));
}

/// Dense covariance matrix of (B(t_1), ..., B(t_n)).
template <typename Scalar>
Matrix<Scalar> build_covariance_matrix(std::span<const Scalar> times, Scalar hurst) {
  if (times.empty()) throw DomainError("build_covariance_matrix: empty time set");
  const Eigen::Index n = static_cast<Eigen::Index>(times.size());
  Matrix<Scalar> cov(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const Scalar c = fbm_covariance(times[i], times[j], hurst);
      cov(i, j) = c;
      cov(j, i) = c;
    }
  }
  return cov;
}

inline Matrix<double> build_covariance_matrix(const TimeGrid& grid, HurstIndex hurst) {
  return build_covariance_matrix<double>(std::span<const double>(grid.times()), hurst.value());
}

/// Same for the mixed kernel.
template <typename Scalar>
Matrix<Scalar> build_mixed_covariance_matrix(std::span<const Scalar> times, Scalar hurst, Scalar alpha_p) {
  if (times.empty()) throw DomainError("build_mixed_covariance_matrix: empty time set");
  const Eigen::Index n = static_cast<Eigen::Index>(times.size());
  Matrix<Scalar> cov(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const Scalar c = mixed_covariance(times[i], times[j], hurst, alpha_p);
      cov(i, j) = c;
      cov(j, i) = c;
    }
  }
  return cov;
}

/// Covariance matrix of the increments over consecutive grid cells, with an
/// implicit anchor at 0 when the grid does not start there.
template <typename Scalar>
Matrix<Scalar> build_increment_covariance(std::span<const Scalar> times, Scalar hurst) {
  const Eigen::Index n = static_cast<Eigen::Index>(times.size());
  auto left = [&](Eigen::Index i) { return i == 0 ? Scalar(0) : times[i - 1]; };
  Matrix<Scalar> cov(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const Scalar c = fbm_increment_covariance(left(i), times[i], left(j), times[j], hurst);
      cov(i, j) = c;
      cov(j, i) = c;
    }
  }
  return cov;
}

/// Autocovariance of fractional Gaussian noise on a grid of step h, lag k.
template <typename Scalar>
Scalar fgn_autocovariance(long long k, Scalar h, Scalar hurst) {
  using std::pow;
  const Scalar kk = static_cast<Scalar>(k < 0 ? -k : k);
  const Scalar two_h = Scalar(2) * hurst;
  const Scalar base = (kk == Scalar(0))
                          ? Scalar(1)
                          : Scalar(0.5) * (pow(kk + Scalar(1), two_h) - Scalar(2) * pow(kk, two_h) +
                                           pow(kk - Scalar(1), two_h));
  return base * pow(h, two_h);
}

}  // namespace fbmlab
