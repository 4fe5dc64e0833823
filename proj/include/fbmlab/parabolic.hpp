#pragma once

#include <algorithm>
#include <cmath>
#include <utility>

#include <Eigen/Dense>

#include "fbmlab/core.hpp"

namespace fbmlab {

/// rho_H((s,x),(t,y)) = max(|s-t|^H, ||x-y||_inf).
template <typename Scalar, typename DerivedX, typename DerivedY>
Scalar rho_h(Scalar s, const Eigen::MatrixBase<DerivedX>& x, Scalar t, const Eigen::MatrixBase<DerivedY>& y,
             Scalar hurst) {
  using std::abs;
  using std::pow;
  const Scalar dt = abs(s - t);
  const Scalar time_part = dt == Scalar(0) ? Scalar(0) : pow(dt, hurst);
  const Scalar space_part = x.size() == 0 ? Scalar(0) : (x - y).template lpNorm<Eigen::Infinity>();
  return std::max(time_part, space_part);
}

struct SpaceTimePoint {
  double t = 0.0;
  Eigen::VectorXd x;
};

inline double rho_h(const SpaceTimePoint& u, const SpaceTimePoint& v, HurstIndex hurst) {
  if (u.x.size() != v.x.size()) throw DomainError("rho_h: points have different spatial dimension");
  return rho_h(u.t, u.x, v.t, v.x, hurst.value());
}

template <typename Scalar>
struct Bounds {
  Scalar lower;
  Scalar upper;
};

namespace detail {
template <typename Scalar>
void check_dim_a(Scalar dim_a) {
  if (!(dim_a >= Scalar(0) && dim_a <= Scalar(1))) throw DomainError("dim(A) must lie in [0,1]");
}
inline void check_d(int d) {
  if (d < 1) throw DomainError("spatial dimension d must be >= 1");
}
template <typename Scalar>
void check_hurst(Scalar h, const char* name) {
  if (!(h > Scalar(0) && h < Scalar(1))) throw DomainError(std::string(name) + " must lie in (0,1)");
}
}  // namespace detail

/// Parabolic dimension of the graph of a d-dimensional fBm of index alpha
/// over A: min((H/alpha) dim A, dim A + d (H - alpha)).
template <typename Scalar>
Scalar theoretical_graph_dimension(Scalar alpha, Scalar hurst, Scalar dim_a, int d) {
  detail::check_hurst(alpha, "alpha");
  detail::check_hurst(hurst, "H");
  detail::check_dim_a(dim_a);
  detail::check_d(d);
  if (alpha > hurst) throw AlphaExceedsH("alpha must not exceed H");
  return std::min(hurst / alpha * dim_a, dim_a + Scalar(d) * (hurst - alpha));
}

/// Bounds on dim_{Psi,H'}(F) from dim_{Psi,H}(F) when H < H'.
template <typename Scalar>
Bounds<Scalar> comparison_bounds(Scalar dim_psi_h, Scalar hurst, Scalar hurst_p, int d) {
  detail::check_hurst(hurst, "H");
  detail::check_hurst(hurst_p, "H'");
  detail::check_d(d);
  if (hurst >= hurst_p) throw HOrderViolation("comparison_bounds needs H < H'");
  if (dim_psi_h < Scalar(0)) throw DomainError("parabolic dimension must be non-negative");
  const Scalar ratio = hurst_p / hurst;
  const Scalar lower = std::max(dim_psi_h, ratio * dim_psi_h + Scalar(1) - ratio);
  const Scalar upper = std::min(ratio * dim_psi_h, dim_psi_h + (hurst_p - hurst) * Scalar(d));
  return {lower, upper};
}

/// Bounds on dim_{Psi,H}(Gr_A f) for an alpha-Holder f.
template <typename Scalar>
Bounds<Scalar> holder_graph_bounds(Scalar alpha, Scalar hurst, Scalar dim_a, int d) {
  detail::check_hurst(alpha, "alpha");
  detail::check_hurst(hurst, "H");
  detail::check_dim_a(dim_a);
  detail::check_d(d);
  if (alpha > hurst) throw AlphaExceedsH("alpha must not exceed H");
  return {dim_a, std::min(hurst / alpha * dim_a, dim_a + (hurst - alpha) * Scalar(d))};
}

/// dim_{Psi,H} = H * dim_{rho_H}.
template <typename Scalar>
Scalar psi_dim_from_metric_dim(Scalar dim_rho, Scalar hurst) {
  detail::check_hurst(hurst, "H");
  if (dim_rho < Scalar(0)) throw DomainError("metric dimension must be non-negative");
  return hurst * dim_rho;
}

template <typename Scalar>
Scalar metric_dim_from_psi_dim(Scalar dim_psi, Scalar hurst) {
  detail::check_hurst(hurst, "H");
  if (dim_psi < Scalar(0)) throw DomainError("parabolic dimension must be non-negative");
  return dim_psi / hurst;
}

/// Anchored parabolic box [a, a+delta] x prod [b_j, b_j + delta^H].
struct ParabolicBox {
  double a = 0.0;
  double delta = 1.0;
  Eigen::VectorXd b;
  double hurst = 0.5;

  ParabolicBox(double a_, double delta_, Eigen::VectorXd b_, HurstIndex h)
      : a(a_), delta(delta_), b(std::move(b_)), hurst(h.value()) {
    if (!(delta > 0.0 && delta <= 1.0)) throw DomainError("ParabolicBox: delta must lie in (0,1]");
  }

  double side() const { return std::pow(delta, hurst); }

  bool contains(const SpaceTimePoint& p) const {
    if (p.t < a || p.t > a + delta) return false;
    const double s = side();
    return ((p.x.array() >= b.array()) && (p.x.array() <= b.array() + s)).all();
  }
};

}  // namespace fbmlab
