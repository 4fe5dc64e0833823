#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fbmlab/fractal_sets.hpp"

namespace fbmlab {

enum class ExperimentKind {
  dim_formula,
  holder_bounds,
  comparison_bounds,
  kernel_scaling,
  occupation_l2,
  interior,
  theorem41,
};

const char* to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(const std::string& name);

/// Time set by name: "interval", "middle-thirds" or "cantor" (two branches,
/// ratio chosen to hit `dim`).
struct SetSpec {
  std::string kind = "interval";
  int generation = 8;
  double dim = 1.0;

  FractalSet build() const;
  std::string label() const;
};

/// Drift added to the sampled path: zero, a fixed linear map, an independent
/// fBm sample of index alpha', or the constant-path control (the fBm part is
/// replaced by zero).
enum class DriftKind { zero, lipschitz, fbm, constant_path };

const char* to_string(DriftKind kind);

struct ExperimentConfig {
  static constexpr int kSchemaVersion = 1;

  ExperimentKind kind = ExperimentKind::dim_formula;
  std::string output;
  std::uint64_t seed_base = 1;

  std::vector<double> alpha;
  std::vector<double> hurst;
  std::vector<double> hurst_p;
  std::vector<double> alpha_p;
  std::vector<double> gamma;
  std::vector<int> dims{1};
  std::vector<SetSpec> sets{SetSpec{}};
  std::vector<DriftKind> drifts{DriftKind::zero};

  int grid_log2 = 14;
  int delta_coarse_log2 = 4;
  int delta_fine_log2 = 12;
  std::vector<int> epsilon_log2{6};
  int radius_cells = 2;
  int radius_coarse_log2 = 4;
  int radius_fine_log2 = 10;
  int seeds = 20;
  std::size_t n_samples = 1'000'000;
  int t_levels = 8;
  std::optional<double> tolerance;
  double min_r_squared = 0.98;
  double threshold = 0.9;
  double ratio_bound = 3.0;
  bool expect_interior = true;

  /// Strict parser: unknown keys, wrong types and out-of-range values throw ConfigError.
  static ExperimentConfig from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;
  /// FNV-1a of the canonical JSON form, as 16 hex digits.
  std::string hash() const;
};

struct ReportRow {
  std::string kind;
  std::vector<std::pair<std::string, std::string>> params;
  std::optional<double> theory;
  std::optional<double> lower;
  std::optional<double> upper;
  double estimate = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::optional<double> r_squared;
  int seeds = 1;
  double threshold = 0.0;
  std::string resolution;
  std::string config_hash;

  static std::string csv_header();
  std::string csv() const;
};

std::vector<ReportRow> run_dim_formula_experiment(const ExperimentConfig& config);
std::vector<ReportRow> run_theorem41_experiment(const ExperimentConfig& config);
/// holder-bounds, comparison-bounds, kernel-scaling, occupation-l2 and interior.
std::vector<ReportRow> run_remaining_experiments(const ExperimentConfig& config);

struct RunOptions {
  /// When set, report.csv, config.json and timing.csv are written here.
  std::optional<std::filesystem::path> out_dir;
  /// Worker threads; 0 reads FBMLAB_THREADS and falls back to the core count.
  int threads = 0;
};

/// Runs every cell of the configured experiment. Cells execute on a work
/// queue; rows are appended to report.csv in parameter order as soon as all
/// earlier cells have finished.
std::vector<ReportRow> run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

int thread_count_from_env();

}  // namespace fbmlab
