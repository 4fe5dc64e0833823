#include "fbmlab/fbm.hpp"

#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/FFT>

namespace fbmlab {

const char* to_string(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::automatic: return "automatic";
    case SamplerKind::cholesky: return "cholesky";
    case SamplerKind::circulant: return "circulant";
  }
  return "unknown";
}

IncrementSampler::IncrementSampler(HurstIndex hurst, const TimeGrid& grid, const SamplerOptions& options)
    : hurst_(hurst.value()), grid_(grid), anchored_at_zero_(grid.starts_at_zero()) {
  if (grid.empty()) throw DomainError("IncrementSampler: empty grid");
  n_incr_ = static_cast<Eigen::Index>(anchored_at_zero_ ? grid.size() - 1 : grid.size());
  if (n_incr_ == 0) {
    kind_ = SamplerKind::cholesky;
    return;
  }

  const bool can_circulant = grid.is_uniform() && anchored_at_zero_;
  switch (options.kind) {
    case SamplerKind::circulant:
      if (!can_circulant) throw DomainError("circulant embedding needs a uniform grid anchored at 0");
      if (!try_circulant(options)) throw CovarianceNotPSD("circulant embedding has negative eigenvalues");
      break;
    case SamplerKind::cholesky:
      build_dense(options);
      break;
    case SamplerKind::automatic:
      if (can_circulant && try_circulant(options)) break;
      build_dense(options);
      break;
  }
}

bool IncrementSampler::try_circulant(const SamplerOptions& options) {
  const Eigen::Index m = n_incr_;
  const Eigen::Index big_m = 2 * m;
  const double h = grid_.step();
  std::vector<double> row(static_cast<std::size_t>(big_m));
  for (Eigen::Index k = 0; k < big_m; ++k) {
    const long long lag = std::min<long long>(k, big_m - k);
    row[static_cast<std::size_t>(k)] = fgn_autocovariance<double>(lag, h, hurst_);
  }
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spectrum;
  fft.fwd(spectrum, row);

  double max_eig = 0.0;
  for (const auto& c : spectrum) max_eig = std::max(max_eig, c.real());
  sqrt_eigen_.assign(static_cast<std::size_t>(big_m), 0.0);
  for (Eigen::Index k = 0; k < big_m; ++k) {
    double lambda = spectrum[static_cast<std::size_t>(k)].real();
    if (lambda < 0.0) {
      if (-lambda > options.circulant_clamp * max_eig) {
        sqrt_eigen_.clear();
        return false;
      }
      lambda = 0.0;
    }
    sqrt_eigen_[static_cast<std::size_t>(k)] = std::sqrt(lambda / static_cast<double>(big_m));
  }
  kind_ = SamplerKind::circulant;
  return true;
}

void IncrementSampler::build_dense(const SamplerOptions& options) {
  if (static_cast<std::size_t>(n_incr_) > options.cholesky_limit) {
    throw CovarianceNotPSD("dense sampler limit exceeded (" + std::to_string(n_incr_) + " increments)");
  }
  std::vector<double> times = grid_.times();
  if (anchored_at_zero_) times.erase(times.begin());
  const Eigen::MatrixXd cov = build_increment_covariance<double>(std::span<const double>(times), hurst_);

  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() == Eigen::Success) {
    factor_ = llt.matrixL();
  } else {
    // Semidefinite up to rounding: fall back to a clamped spectral square root.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    const double tol = options.psd_tolerance * cov.trace();
    if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() < -tol) {
      throw CovarianceNotPSD("increment covariance is not positive semidefinite");
    }
    const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    factor_ = eig.eigenvectors() * root.asDiagonal();
  }
  kind_ = SamplerKind::cholesky;
}

Eigen::VectorXd IncrementSampler::draw(const NormalStream& stream) const {
  const Eigen::Index m = n_incr_;
  if (m == 0) return Eigen::VectorXd();
  if (kind_ == SamplerKind::circulant) {
    const std::size_t big_m = sqrt_eigen_.size();
    std::vector<std::complex<double>> weights(big_m);
    for (std::size_t k = 0; k < big_m; ++k) {
      weights[k] = sqrt_eigen_[k] * std::complex<double>(stream.normal(2 * k), stream.normal(2 * k + 1));
    }
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> out;
    fft.fwd(out, weights);
    Eigen::VectorXd incr(m);
    for (Eigen::Index i = 0; i < m; ++i) incr[i] = out[static_cast<std::size_t>(i)].real();
    return incr;
  }
  Eigen::VectorXd z(factor_.cols());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = stream.normal(static_cast<std::uint64_t>(i));
  return factor_ * z;
}

Eigen::VectorXd IncrementSampler::path(const NormalStream& stream) const {
  const Eigen::VectorXd incr = draw(stream);
  Eigen::VectorXd values(static_cast<Eigen::Index>(grid_.size()));
  double acc = 0.0;
  Eigen::Index out = 0;
  if (anchored_at_zero_) values[out++] = 0.0;
  for (Eigen::Index i = 0; i < incr.size(); ++i) {
    acc += incr[i];
    values[out++] = acc;
  }
  return values;
}

FbmGenerator::FbmGenerator(HurstIndex hurst, const TimeGrid& grid, const SamplerOptions& options)
    : sampler_(hurst, grid, options), grid_(grid) {}

SamplePath FbmGenerator::generate(int dim, std::uint64_t seed, std::uint32_t component) const {
  if (dim < 1) throw DomainError("path dimension must be >= 1");
  SamplePath out;
  out.grid = grid_;
  out.values.resize(static_cast<Eigen::Index>(grid_.size()), dim);
  for (int j = 0; j < dim; ++j) {
    const NormalStream stream(seed, StreamId{component, static_cast<std::uint32_t>(j)});
    out.values.col(j) = sampler_.path(stream);
  }
  out.hurst_components = {sampler_.hurst()};
  out.seeds = {seed};
  out.sampler = sampler_.kind();
  return out;
}

SamplePath generate_fbm_path(HurstIndex hurst, const TimeGrid& grid, int dim, std::uint64_t seed,
                             const SamplerOptions& options) {
  return FbmGenerator(hurst, grid, options).generate(dim, seed);
}

SamplePath add_paths(const SamplePath& a, const SamplePath& b) {
  if (!(a.grid == b.grid) || a.dim() != b.dim()) throw GridMismatch("add_paths: grids or dimensions differ");
  SamplePath out = a;
  out.values += b.values;
  out.hurst_components.insert(out.hurst_components.end(), b.hurst_components.begin(), b.hurst_components.end());
  out.seeds.insert(out.seeds.end(), b.seeds.begin(), b.seeds.end());
  return out;
}

SamplePath generate_mixed_path(HurstIndex hurst, HurstIndex alpha_p, const TimeGrid& grid, int dim,
                               std::pair<std::uint64_t, std::uint64_t> seeds, const SamplerOptions& options) {
  const SamplePath main = FbmGenerator(hurst, grid, options).generate(dim, seeds.first, 0);
  const SamplePath rough = FbmGenerator(alpha_p, grid, options).generate(dim, seeds.second, 1);
  return add_paths(main, rough);
}

}  // namespace fbmlab
