#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fbmlab/core.hpp"
#include "fbmlab/covariance.hpp"
#include "fbmlab/random.hpp"

namespace fbmlab {

enum class SamplerKind { automatic, cholesky, circulant };

const char* to_string(SamplerKind kind);

struct SamplerOptions {
  SamplerKind kind = SamplerKind::automatic;
  /// Largest number of increments the dense sampler accepts.
  std::size_t cholesky_limit = 4096;
  /// Negative circulant eigenvalues with |lambda| below this fraction of the
  /// largest eigenvalue are clamped to zero; larger ones are an error.
  double circulant_clamp = 1e-8;
  /// Tolerance for the PSD check of the dense fallback (relative to trace).
  double psd_tolerance = 1e-10;
};

/// A sampled path on a time grid: values(i, j) is coordinate j at grid time i.
struct SamplePath {
  TimeGrid grid;
  Eigen::MatrixXd values;
  std::vector<double> hurst_components;
  std::vector<std::uint64_t> seeds;
  SamplerKind sampler = SamplerKind::automatic;

  Eigen::Index dim() const noexcept { return values.cols(); }
  Eigen::Index size() const noexcept { return values.rows(); }
};

/// Exact sampler of the increment vector of one fBm coordinate on a fixed
/// grid. The factorization is computed once and reused for every draw.
class IncrementSampler {
 public:
  IncrementSampler(HurstIndex hurst, const TimeGrid& grid, const SamplerOptions& options = {});

  /// Number of increments per draw.
  Eigen::Index size() const noexcept { return n_incr_; }
  SamplerKind kind() const noexcept { return kind_; }
  double hurst() const noexcept { return hurst_; }

  Eigen::VectorXd draw(const NormalStream& stream) const;

  /// Cumulative sum of one draw, i.e. path values on the grid.
  Eigen::VectorXd path(const NormalStream& stream) const;

 private:
  bool try_circulant(const SamplerOptions& options);
  void build_dense(const SamplerOptions& options);

  double hurst_;
  TimeGrid grid_;
  bool anchored_at_zero_;
  Eigen::Index n_incr_ = 0;
  SamplerKind kind_ = SamplerKind::automatic;
  // circulant embedding: sqrt(lambda_k / M)
  std::vector<double> sqrt_eigen_;
  // dense: lower factor with cov = L L^T
  Eigen::MatrixXd factor_;
};

/// Draws fBm paths of one Hurst index on one grid for any (d, seed).
class FbmGenerator {
 public:
  FbmGenerator(HurstIndex hurst, const TimeGrid& grid, const SamplerOptions& options = {});

  /// Coordinates j use stream {component, j} under `seed`.
  SamplePath generate(int dim, std::uint64_t seed, std::uint32_t component = 0) const;

  const IncrementSampler& sampler() const noexcept { return sampler_; }

 private:
  IncrementSampler sampler_;
  TimeGrid grid_;
};

SamplePath generate_fbm_path(HurstIndex hurst, const TimeGrid& grid, int dim, std::uint64_t seed,
                             const SamplerOptions& options = {});

/// Z = B^H + B^{alpha'} with the two components drawn from independent
/// seed streams (component 0 under seeds.first, component 1 under seeds.second).
SamplePath generate_mixed_path(HurstIndex hurst, HurstIndex alpha_p, const TimeGrid& grid, int dim,
                               std::pair<std::uint64_t, std::uint64_t> seeds,
                               const SamplerOptions& options = {});

/// Coordinatewise sum of two paths on the same grid.
SamplePath add_paths(const SamplePath& a, const SamplePath& b);

}  // namespace fbmlab
