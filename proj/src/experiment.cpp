#include "fbmlab/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "fbmlab/estimators.hpp"
#include "fbmlab/fbm.hpp"
#include "fbmlab/io.hpp"
#include "fbmlab/occupation.hpp"
#include "fbmlab/parabolic.hpp"

namespace fbmlab {

using nlohmann::json;

const char* to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::dim_formula: return "dim-formula";
    case ExperimentKind::holder_bounds: return "holder-bounds";
    case ExperimentKind::comparison_bounds: return "comparison-bounds";
    case ExperimentKind::kernel_scaling: return "kernel-scaling";
    case ExperimentKind::occupation_l2: return "occupation-l2";
    case ExperimentKind::interior: return "interior";
    case ExperimentKind::theorem41: return "theorem41";
  }
  return "unknown";
}

ExperimentKind parse_experiment_kind(const std::string& name) {
  for (auto kind : {ExperimentKind::dim_formula, ExperimentKind::holder_bounds, ExperimentKind::comparison_bounds,
                    ExperimentKind::kernel_scaling, ExperimentKind::occupation_l2, ExperimentKind::interior,
                    ExperimentKind::theorem41}) {
    if (name == to_string(kind)) return kind;
  }
  throw ConfigError("unknown experiment kind '" + name + "'");
}

const char* to_string(DriftKind kind) {
  switch (kind) {
    case DriftKind::zero: return "zero";
    case DriftKind::lipschitz: return "lipschitz";
    case DriftKind::fbm: return "fbm";
    case DriftKind::constant_path: return "constant-path";
  }
  return "unknown";
}

namespace {

DriftKind parse_drift(const std::string& name) {
  for (auto kind : {DriftKind::zero, DriftKind::lipschitz, DriftKind::fbm, DriftKind::constant_path}) {
    if (name == to_string(kind)) return kind;
  }
  throw ConfigError("unknown drift '" + name + "'");
}

}  // namespace

FractalSet SetSpec::build() const {
  if (kind == "interval") return full_interval();
  if (kind == "middle-thirds") return middle_thirds_cantor(generation);
  if (kind == "cantor") return generalized_cantor(2, cantor_ratio_for_dimension(2, dim), generation);
  throw ConfigError("unknown set kind '" + kind + "'");
}

std::string SetSpec::label() const {
  if (kind == "interval") return kind;
  std::string out = kind + "/g" + std::to_string(generation);
  if (kind == "cantor") out += "/dim" + io::format_double(dim);
  return out;
}

// ---------------------------------------------------------------------------
// Config parsing

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
std::vector<T> read_list(const json& v, const std::string& key) {
  try {
    if (v.is_array()) return v.get<std::vector<T>>();
    return {v.get<T>()};
  } catch (const json::exception&) {
    throw ConfigError("'" + key + "' has the wrong type");
  }
}

template <typename T>
T read_scalar(const json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("'" + key + "' has the wrong type");
  }
}

void check_hurst_list(const std::vector<double>& values, const std::string& key) {
  for (double h : values) {
    if (!(h > 0.0 && h < 1.0)) throw ConfigError("'" + key + "' values must lie in (0,1)");
  }
}

SetSpec read_set(const json& v) {
  SetSpec spec;
  if (v.is_string()) {
    spec.kind = v.get<std::string>();
  } else if (v.is_object()) {
    reject_unknown(v, {"kind", "generation", "dim"}, "set");
    if (!v.contains("kind")) throw ConfigError("set needs a 'kind'");
    spec.kind = read_scalar<std::string>(v["kind"], "set.kind");
    if (v.contains("generation")) spec.generation = read_scalar<int>(v["generation"], "set.generation");
    if (v.contains("dim")) spec.dim = read_scalar<double>(v["dim"], "set.dim");
  } else {
    throw ConfigError("set must be a string or an object");
  }
  if (spec.kind != "interval" && spec.kind != "middle-thirds" && spec.kind != "cantor") {
    throw ConfigError("unknown set kind '" + spec.kind + "'");
  }
  if (spec.kind == "cantor" && !(spec.dim > 0.0 && spec.dim < 1.0)) throw ConfigError("cantor dim must lie in (0,1)");
  if (spec.kind == "middle-thirds") spec.dim = std::log(2.0) / std::log(3.0);
  if (spec.generation < 0) throw ConfigError("set generation must be >= 0");
  return spec;
}

json set_to_json(const SetSpec& s) {
  json out{{"kind", s.kind}};
  if (s.kind != "interval") out["generation"] = s.generation;
  if (s.kind == "cantor") out["dim"] = s.dim;
  return out;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown(doc, {"schema_version", "kind", "output", "seed_base", "params"}, "config");
  if (!doc.contains("schema_version")) throw ConfigError("config needs 'schema_version'");
  if (read_scalar<int>(doc["schema_version"], "schema_version") != kSchemaVersion) {
    throw ConfigError("unsupported schema_version (expected " + std::to_string(kSchemaVersion) + ")");
  }
  if (!doc.contains("kind")) throw ConfigError("config needs 'kind'");
  ExperimentConfig cfg;
  cfg.kind = parse_experiment_kind(read_scalar<std::string>(doc["kind"], "kind"));
  if (doc.contains("output")) cfg.output = read_scalar<std::string>(doc["output"], "output");
  if (doc.contains("seed_base")) cfg.seed_base = read_scalar<std::uint64_t>(doc["seed_base"], "seed_base");

  const json params = doc.contains("params") ? doc["params"] : json::object();
  if (!params.is_object()) throw ConfigError("'params' must be an object");
  reject_unknown(params,
                 {"alpha", "hurst", "hurst_p", "alpha_p", "gamma", "d", "sets", "drifts", "grid_log2",
                  "delta_log2", "epsilon_log2", "radius_cells", "radius_log2", "seeds", "n_samples", "t_levels",
                  "tolerance", "min_r_squared", "threshold", "ratio_bound", "expect_interior"},
                 "params");
  auto has = [&](const char* key) { return params.contains(key); };
  if (has("alpha")) cfg.alpha = read_list<double>(params["alpha"], "alpha");
  if (has("hurst")) cfg.hurst = read_list<double>(params["hurst"], "hurst");
  if (has("hurst_p")) cfg.hurst_p = read_list<double>(params["hurst_p"], "hurst_p");
  if (has("alpha_p")) cfg.alpha_p = read_list<double>(params["alpha_p"], "alpha_p");
  if (has("gamma")) cfg.gamma = read_list<double>(params["gamma"], "gamma");
  if (has("d")) cfg.dims = read_list<int>(params["d"], "d");
  if (has("sets")) {
    cfg.sets.clear();
    const json& sets = params["sets"];
    if (sets.is_array()) {
      for (const auto& s : sets) cfg.sets.push_back(read_set(s));
    } else {
      cfg.sets.push_back(read_set(sets));
    }
  }
  if (has("drifts")) {
    cfg.drifts.clear();
    for (const auto& name : read_list<std::string>(params["drifts"], "drifts")) cfg.drifts.push_back(parse_drift(name));
  }
  if (has("grid_log2")) cfg.grid_log2 = read_scalar<int>(params["grid_log2"], "grid_log2");
  if (has("delta_log2")) {
    const auto range = read_list<int>(params["delta_log2"], "delta_log2");
    if (range.size() != 2) throw ConfigError("'delta_log2' must be [coarse, fine]");
    cfg.delta_coarse_log2 = range[0];
    cfg.delta_fine_log2 = range[1];
  }
  if (has("epsilon_log2")) cfg.epsilon_log2 = read_list<int>(params["epsilon_log2"], "epsilon_log2");
  if (has("radius_cells")) cfg.radius_cells = read_scalar<int>(params["radius_cells"], "radius_cells");
  if (has("radius_log2")) {
    const auto range = read_list<int>(params["radius_log2"], "radius_log2");
    if (range.size() != 2) throw ConfigError("'radius_log2' must be [coarse, fine]");
    cfg.radius_coarse_log2 = range[0];
    cfg.radius_fine_log2 = range[1];
  }
  if (has("seeds")) cfg.seeds = read_scalar<int>(params["seeds"], "seeds");
  if (has("n_samples")) cfg.n_samples = read_scalar<std::size_t>(params["n_samples"], "n_samples");
  if (has("t_levels")) cfg.t_levels = read_scalar<int>(params["t_levels"], "t_levels");
  if (has("tolerance")) cfg.tolerance = read_scalar<double>(params["tolerance"], "tolerance");
  if (has("min_r_squared")) cfg.min_r_squared = read_scalar<double>(params["min_r_squared"], "min_r_squared");
  if (has("threshold")) cfg.threshold = read_scalar<double>(params["threshold"], "threshold");
  if (has("ratio_bound")) cfg.ratio_bound = read_scalar<double>(params["ratio_bound"], "ratio_bound");
  if (has("expect_interior")) cfg.expect_interior = read_scalar<bool>(params["expect_interior"], "expect_interior");

  check_hurst_list(cfg.alpha, "alpha");
  check_hurst_list(cfg.hurst, "hurst");
  check_hurst_list(cfg.hurst_p, "hurst_p");
  check_hurst_list(cfg.alpha_p, "alpha_p");
  for (double g : cfg.gamma) {
    if (!(g > 0.0)) throw ConfigError("'gamma' values must be positive");
  }
  for (int d : cfg.dims) {
    if (d < 1) throw ConfigError("'d' values must be >= 1");
  }
  if (cfg.seeds < 1) throw ConfigError("'seeds' must be >= 1");
  if (cfg.grid_log2 < 2 || cfg.grid_log2 > 24) throw ConfigError("'grid_log2' must lie in [2, 24]");
  if (cfg.delta_coarse_log2 < 0 || cfg.delta_fine_log2 <= cfg.delta_coarse_log2) {
    throw ConfigError("'delta_log2' must satisfy 0 <= coarse < fine");
  }
  if (cfg.radius_coarse_log2 < 0 || cfg.radius_fine_log2 <= cfg.radius_coarse_log2) {
    throw ConfigError("'radius_log2' must satisfy 0 <= coarse < fine");
  }
  if (cfg.epsilon_log2.empty()) throw ConfigError("'epsilon_log2' must be non-empty");
  if (cfg.radius_cells < 1) throw ConfigError("'radius_cells' must be >= 1");
  if (cfg.t_levels < 3) throw ConfigError("'t_levels' must be >= 3");
  if (cfg.n_samples == 0) throw ConfigError("'n_samples' must be positive");
  if (!(cfg.threshold > 0.0 && cfg.threshold <= 1.0)) throw ConfigError("'threshold' must lie in (0,1]");
  if (cfg.tolerance && !(*cfg.tolerance > 0.0)) throw ConfigError("'tolerance' must be positive");
  if (cfg.sets.empty() || cfg.drifts.empty() || cfg.dims.empty()) throw ConfigError("empty parameter list");

  auto require = [&](const std::vector<double>& v, const char* key) {
    if (v.empty()) throw ConfigError(std::string(to_string(cfg.kind)) + " needs '" + key + "'");
  };
  switch (cfg.kind) {
    case ExperimentKind::dim_formula:
    case ExperimentKind::holder_bounds:
      require(cfg.alpha, "alpha");
      require(cfg.hurst, "hurst");
      break;
    case ExperimentKind::comparison_bounds:
      require(cfg.alpha, "alpha");
      require(cfg.hurst, "hurst");
      require(cfg.hurst_p, "hurst_p");
      break;
    case ExperimentKind::kernel_scaling:
      require(cfg.alpha, "alpha");
      require(cfg.hurst, "hurst");
      require(cfg.gamma, "gamma");
      break;
    case ExperimentKind::occupation_l2:
      require(cfg.hurst, "hurst");
      break;
    case ExperimentKind::interior:
    case ExperimentKind::theorem41:
      require(cfg.hurst, "hurst");
      if (std::count(cfg.drifts.begin(), cfg.drifts.end(), DriftKind::fbm) > 0) require(cfg.alpha_p, "alpha_p");
      break;
  }
  return cfg;
}

json ExperimentConfig::to_json() const {
  json sets_json = json::array();
  for (const auto& s : sets) sets_json.push_back(set_to_json(s));
  json drifts_json = json::array();
  for (auto d : drifts) drifts_json.push_back(fbmlab::to_string(d));
  json params{{"alpha", alpha},
              {"hurst", hurst},
              {"hurst_p", hurst_p},
              {"alpha_p", alpha_p},
              {"gamma", gamma},
              {"d", dims},
              {"sets", sets_json},
              {"drifts", drifts_json},
              {"grid_log2", grid_log2},
              {"delta_log2", {delta_coarse_log2, delta_fine_log2}},
              {"epsilon_log2", epsilon_log2},
              {"radius_cells", radius_cells},
              {"radius_log2", {radius_coarse_log2, radius_fine_log2}},
              {"seeds", seeds},
              {"n_samples", n_samples},
              {"t_levels", t_levels},
              {"min_r_squared", min_r_squared},
              {"threshold", threshold},
              {"ratio_bound", ratio_bound},
              {"expect_interior", expect_interior}};
  if (tolerance) params["tolerance"] = *tolerance;
  json doc{{"schema_version", kSchemaVersion},
           {"kind", fbmlab::to_string(kind)},
           {"seed_base", seed_base},
           {"params", params}};
  if (!output.empty()) doc["output"] = output;
  return doc;
}

std::string ExperimentConfig::hash() const {
  json canonical = to_json();
  canonical.erase("output");
  const std::string text = canonical.dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// Report rows

namespace {

std::string optional_field(const std::optional<double>& v) { return v ? io::format_double(*v) : std::string(); }

}  // namespace

std::string ReportRow::csv_header() {
  return "config_hash,kind,params,theory,lower,upper,estimate,tolerance,pass,r_squared,seeds,threshold,resolution";
}

std::string ReportRow::csv() const {
  std::ostringstream out;
  std::string joined;
  for (const auto& [key, value] : params) {
    if (!joined.empty()) joined += ';';
    joined += key + '=' + value;
  }
  out << config_hash << ',' << kind << ',' << joined << ',' << optional_field(theory) << ','
      << optional_field(lower) << ',' << optional_field(upper) << ',' << io::format_double(estimate) << ','
      << io::format_double(tolerance) << ',' << (pass ? "true" : "false") << ',' << optional_field(r_squared) << ','
      << seeds << ',' << io::format_double(threshold) << ',' << resolution;
  return out.str();
}

// ---------------------------------------------------------------------------
// Cells

namespace {

struct Cell {
  std::vector<double> key;
  std::function<ReportRow()> run;
};

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string fmt(double v) { return io::format_double(v); }

std::string pow2_label(int k) { return "2^-" + std::to_string(k); }

std::uint64_t seed_of(const ExperimentConfig& cfg, int s) { return cfg.seed_base + static_cast<std::uint64_t>(s); }

Eigen::MatrixXd lipschitz_drift(const TimeGrid& grid, int d) {
  Eigen::MatrixXd f(static_cast<Eigen::Index>(grid.size()), d);
  for (Eigen::Index i = 0; i < f.rows(); ++i) {
    for (int j = 0; j < d; ++j) f(i, j) = std::sin(2.0 * M_PI * (j + 1) * grid[static_cast<std::size_t>(i)]) / (j + 1);
  }
  return f;
}

Eigen::MatrixXd make_drift(DriftKind kind, const TimeGrid& grid, int d, double alpha_p, std::uint64_t seed,
                           const std::optional<FbmGenerator>& drift_gen) {
  switch (kind) {
    case DriftKind::lipschitz: return lipschitz_drift(grid, d);
    case DriftKind::fbm: return drift_gen->generate(d, seed, 1).values;
    default: (void)alpha_p; return Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(grid.size()), d);
  }
}

struct GraphEstimates {
  double exponent;
  double r_squared;
};

// Median parabolic box dimension of the B^alpha graph over the set.
GraphEstimates graph_dimension(const ExperimentConfig& cfg, double alpha, double hurst, int d, const FractalSet& set) {
  const auto grid = TimeGrid::uniform(std::size_t{1} << cfg.grid_log2);
  const FbmGenerator gen(HurstIndex(alpha), grid);
  const auto indices = grid_indices_in(set, grid);
  const auto deltas = dyadic_scales(cfg.delta_coarse_log2, cfg.delta_fine_log2);
  std::vector<double> exps;
  std::vector<double> r2s;
  for (int s = 0; s < cfg.seeds; ++s) {
    const auto cloud = graph_of_path(gen.generate(d, seed_of(cfg, s)), indices, true);
    const auto est = estimate_parabolic_dimension(cloud, deltas, hurst);
    exps.push_back(est.exponent);
    r2s.push_back(est.r_squared);
  }
  return {median(exps), median(r2s)};
}

std::string delta_resolution(const ExperimentConfig& cfg) {
  return "grid=2^" + std::to_string(cfg.grid_log2) + ";delta=" + pow2_label(cfg.delta_coarse_log2) + ".." +
         pow2_label(cfg.delta_fine_log2);
}

void add_dim_cells(const ExperimentConfig& cfg, std::vector<Cell>& cells, bool bounds_only) {
  for (double alpha : cfg.alpha) {
    for (double hurst : cfg.hurst) {
      if (alpha > hurst) throw AlphaExceedsH("alpha " + fmt(alpha) + " exceeds H " + fmt(hurst));
      for (int d : cfg.dims) {
        for (std::size_t si = 0; si < cfg.sets.size(); ++si) {
          const SetSpec spec = cfg.sets[si];
          cells.push_back({{alpha, hurst, double(d), double(si)}, [&cfg, alpha, hurst, d, spec, bounds_only] {
                             const FractalSet set = spec.build();
                             const auto est = graph_dimension(cfg, alpha, hurst, d, set);
                             ReportRow row;
                             row.kind = to_string(cfg.kind);
                             row.params = {{"alpha", fmt(alpha)}, {"H", fmt(hurst)}, {"d", std::to_string(d)},
                                           {"set", spec.label()}};
                             row.estimate = est.exponent;
                             row.r_squared = est.r_squared;
                             row.seeds = cfg.seeds;
                             row.resolution = delta_resolution(cfg);
                             if (bounds_only) {
                               const auto b = holder_graph_bounds(alpha, hurst, set.theoretical_dim, d);
                               row.tolerance = cfg.tolerance.value_or(0.1);
                               row.lower = b.lower;
                               row.upper = b.upper;
                               row.pass = est.exponent >= b.lower - row.tolerance &&
                                          est.exponent <= b.upper + row.tolerance;
                             } else {
                               row.theory = theoretical_graph_dimension(alpha, hurst, set.theoretical_dim, d);
                               row.tolerance = cfg.tolerance.value_or(d == 1 ? 0.1 : 0.15);
                               row.pass = std::abs(est.exponent - *row.theory) <= row.tolerance &&
                                          est.r_squared >= cfg.min_r_squared;
                             }
                             return row;
                           }});
        }
      }
    }
  }
}

void add_comparison_cells(const ExperimentConfig& cfg, std::vector<Cell>& cells) {
  for (double alpha : cfg.alpha) {
    for (double hurst : cfg.hurst) {
      if (alpha > hurst) throw AlphaExceedsH("alpha " + fmt(alpha) + " exceeds H " + fmt(hurst));
      for (double hurst_p : cfg.hurst_p) {
        if (hurst >= hurst_p) throw HOrderViolation("comparison-bounds needs H < H'");
        for (int d : cfg.dims) {
          for (std::size_t si = 0; si < cfg.sets.size(); ++si) {
            const SetSpec spec = cfg.sets[si];
            cells.push_back({{alpha, hurst, hurst_p, double(d), double(si)}, [&cfg, alpha, hurst, hurst_p, d, spec] {
                               const FractalSet set = spec.build();
                               const auto at_h = graph_dimension(cfg, alpha, hurst, d, set);
                               const auto at_hp = graph_dimension(cfg, alpha, hurst_p, d, set);
                               const auto b = comparison_bounds(at_h.exponent, hurst, hurst_p, d);
                               ReportRow row;
                               row.kind = to_string(cfg.kind);
                               row.params = {{"alpha", fmt(alpha)}, {"H", fmt(hurst)}, {"H'", fmt(hurst_p)},
                                             {"d", std::to_string(d)}, {"set", spec.label()},
                                             {"dim_at_H", fmt(at_h.exponent)}};
                               row.lower = b.lower;
                               row.upper = b.upper;
                               row.estimate = at_hp.exponent;
                               row.r_squared = std::min(at_h.r_squared, at_hp.r_squared);
                               row.tolerance = cfg.tolerance.value_or(0.1);
                               row.pass = at_hp.exponent >= b.lower - row.tolerance &&
                                          at_hp.exponent <= b.upper + row.tolerance;
                               row.seeds = cfg.seeds;
                               row.resolution = delta_resolution(cfg);
                               return row;
                             }});
          }
        }
      }
    }
  }
}

void add_kernel_cells(const ExperimentConfig& cfg, std::vector<Cell>& cells) {
  for (double alpha : cfg.alpha) {
    for (double hurst : cfg.hurst) {
      if (alpha > hurst) throw AlphaExceedsH("alpha " + fmt(alpha) + " exceeds H " + fmt(hurst));
      for (double gamma : cfg.gamma) {
        for (int d : cfg.dims) {
          cells.push_back({{alpha, hurst, gamma, double(d)}, [&cfg, alpha, hurst, gamma, d] {
                             std::vector<double> log_t;
                             std::vector<double> log_v;
                             for (int k = 1; k <= cfg.t_levels; ++k) {
                               const double t = std::ldexp(1.0, -k);
                               log_t.push_back(std::log(t));
                               log_v.push_back(std::log(
                                   kernel_expectation_mc(t, alpha, hurst, gamma, d, cfg.n_samples, cfg.seed_base)));
                             }
                             const auto fit = least_squares(log_t, log_v);
                             const bool low = gamma < hurst * d;
                             ReportRow row;
                             row.kind = to_string(cfg.kind);
                             row.params = {{"alpha", fmt(alpha)}, {"H", fmt(hurst)}, {"gamma", fmt(gamma)},
                                           {"d", std::to_string(d)}, {"branch", low ? "gamma<Hd" : "gamma>Hd"}};
                             row.theory = low ? -gamma * alpha / hurst : d * (hurst - alpha) - gamma;
                             row.estimate = fit.slope;
                             row.r_squared = fit.r_squared;
                             row.tolerance = cfg.tolerance.value_or(0.05) * std::abs(*row.theory);
                             row.pass = std::abs(fit.slope - *row.theory) <= row.tolerance;
                             row.seeds = 1;
                             row.resolution = "t=2^-1..2^-" + std::to_string(cfg.t_levels) +
                                              ";n=" + std::to_string(cfg.n_samples);
                             return row;
                           }});
        }
      }
    }
  }
}

// Ensemble of drifted images for one (H, d, set, drift) tuple.
std::vector<WeightedImage> drifted_ensemble(const ExperimentConfig& cfg, double hurst, int d, const FractalSet& set,
                                            DriftKind drift, double alpha_p) {
  const auto grid = TimeGrid::uniform(std::size_t{1} << cfg.grid_log2);
  const FbmGenerator gen(HurstIndex(hurst), grid);
  std::optional<FbmGenerator> drift_gen;
  if (drift == DriftKind::fbm) drift_gen.emplace(HurstIndex(alpha_p), grid);
  const auto nu = grid_points_in(set, grid);
  if (nu.size() < 2) throw DomainError("time set contains fewer than two grid points");
  std::vector<WeightedImage> images;
  for (int s = 0; s < cfg.seeds; ++s) {
    SamplePath path = gen.generate(d, seed_of(cfg, s));
    if (drift == DriftKind::constant_path) path.values.setZero();
    images.push_back(drifted_image(path, make_drift(drift, grid, d, alpha_p, seed_of(cfg, s), drift_gen), nu));
  }
  return images;
}

std::vector<double> alpha_p_list(const ExperimentConfig& cfg, DriftKind drift) {
  if (drift == DriftKind::fbm) return cfg.alpha_p;
  return {0.0};
}

void add_l2_cells(const ExperimentConfig& cfg, std::vector<Cell>& cells) {
  for (double hurst : cfg.hurst) {
    for (int d : cfg.dims) {
      for (std::size_t si = 0; si < cfg.sets.size(); ++si) {
        const SetSpec spec = cfg.sets[si];
        for (std::size_t di = 0; di < cfg.drifts.size(); ++di) {
          const DriftKind drift = cfg.drifts[di];
          for (double alpha_p : alpha_p_list(cfg, drift)) {
            cells.push_back({{hurst, double(d), double(si), double(di), alpha_p}, [&cfg, hurst, d, spec, drift,
                                                                                   alpha_p] {
                               const FractalSet set = spec.build();
                               if (drift != DriftKind::constant_path && !(set.theoretical_dim > hurst * d)) {
                                 throw InfeasibleParameters("occupation-l2 needs dim(A) > H d");
                               }
                               std::vector<double> radii;
                               for (int k = cfg.radius_coarse_log2; k <= cfg.radius_fine_log2; ++k) {
                                 radii.push_back(std::ldexp(1.0, -k));
                               }
                               const auto images = drifted_ensemble(cfg, hurst, d, set, drift, alpha_p);
                               const auto values = l2_density_diagnostic(images, radii);
                               ReportRow row;
                               row.kind = to_string(cfg.kind);
                               row.params = {{"H", fmt(hurst)}, {"d", std::to_string(d)}, {"set", spec.label()},
                                             {"drift", to_string(drift)}};
                               if (drift == DriftKind::fbm) row.params.emplace_back("alpha_p", fmt(alpha_p));
                               row.seeds = cfg.seeds;
                               row.resolution = "grid=2^" + std::to_string(cfg.grid_log2) + ";r=" +
                                                pow2_label(cfg.radius_coarse_log2) + ".." +
                                                pow2_label(cfg.radius_fine_log2);
                               if (drift == DriftKind::constant_path) {
                                 std::vector<double> lr;
                                 std::vector<double> lv;
                                 for (std::size_t k = 0; k < radii.size(); ++k) {
                                   lr.push_back(std::log(radii[k]));
                                   lv.push_back(std::log(values[k]));
                                 }
                                 const auto fit = least_squares(lr, lv);
                                 row.theory = -double(d);
                                 row.estimate = fit.slope;
                                 row.r_squared = fit.r_squared;
                                 row.tolerance = 0.1 * d;
                                 row.pass = std::abs(fit.slope - *row.theory) <= row.tolerance;
                               } else {
                                 const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
                                 row.estimate = *hi / *lo;
                                 row.upper = cfg.ratio_bound;
                                 row.tolerance = 0.0;
                                 row.pass = row.estimate <= cfg.ratio_bound;
                               }
                               return row;
                             }});
          }
        }
      }
    }
  }
}

void add_interior_cells(const ExperimentConfig& cfg, std::vector<Cell>& cells, bool theorem41) {
  for (double hurst : cfg.hurst) {
    for (int d : cfg.dims) {
      for (std::size_t si = 0; si < cfg.sets.size(); ++si) {
        const SetSpec spec = cfg.sets[si];
        for (std::size_t di = 0; di < cfg.drifts.size(); ++di) {
          const DriftKind drift = cfg.drifts[di];
          for (double alpha_p : alpha_p_list(cfg, drift)) {
            for (int eps_log2 : cfg.epsilon_log2) {
              cells.push_back({{hurst, double(d), double(si), double(di), alpha_p, double(eps_log2)},
                               [&cfg, hurst, d, spec, drift, alpha_p, eps_log2, theorem41] {
                                 const FractalSet set = spec.build();
                                 const double dim_a = set.theoretical_dim;
                                 if (theorem41) {
                                   if (dim_a > hurst * d) throw InfeasibleParameters("theorem41 needs dim(A) <= H d");
                                   if (drift == DriftKind::fbm && !(alpha_p * d < dim_a)) {
                                     throw InfeasibleParameters("theorem41 needs alpha' d < dim(A)");
                                   }
                                 }
                                 const double eps = std::ldexp(1.0, -eps_log2);
                                 const auto images = drifted_ensemble(cfg, hurst, d, set, drift, alpha_p);
                                 std::vector<OccupationHistogram> hists;
                                 for (const auto& im : images) hists.push_back(occupation_histogram(im, eps));
                                 const auto report = interior_probe(hists, cfg.radius_cells);
                                 ReportRow row;
                                 row.kind = to_string(cfg.kind);
                                 row.params = {{"H", fmt(hurst)}, {"d", std::to_string(d)}, {"set", spec.label()},
                                               {"drift", to_string(drift)},
                                               {"expect_interior", cfg.expect_interior ? "true" : "false"}};
                                 if (drift == DriftKind::fbm) row.params.emplace_back("alpha_p", fmt(alpha_p));
                                 row.estimate = report.fraction_of_seeds_with_interior;
                                 row.tolerance = 0.0;
                                 if (cfg.expect_interior) {
                                   row.lower = cfg.threshold;
                                   row.pass = row.estimate >= cfg.threshold;
                                 } else {
                                   row.upper = 1.0 - cfg.threshold;
                                   row.pass = row.estimate <= 1.0 - cfg.threshold;
                                 }
                                 row.seeds = cfg.seeds;
                                 row.threshold = cfg.threshold;
                                 row.resolution = "grid=2^" + std::to_string(cfg.grid_log2) + ";eps=" +
                                                  pow2_label(eps_log2) + ";radius=" + std::to_string(cfg.radius_cells);
                                 return row;
                               }});
            }
          }
        }
      }
    }
  }
}

std::vector<Cell> build_cells(const ExperimentConfig& cfg) {
  std::vector<Cell> cells;
  switch (cfg.kind) {
    case ExperimentKind::dim_formula: add_dim_cells(cfg, cells, false); break;
    case ExperimentKind::holder_bounds: add_dim_cells(cfg, cells, true); break;
    case ExperimentKind::comparison_bounds: add_comparison_cells(cfg, cells); break;
    case ExperimentKind::kernel_scaling: add_kernel_cells(cfg, cells); break;
    case ExperimentKind::occupation_l2: add_l2_cells(cfg, cells); break;
    case ExperimentKind::interior: add_interior_cells(cfg, cells, false); break;
    case ExperimentKind::theorem41: add_interior_cells(cfg, cells, true); break;
  }
  std::stable_sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) { return a.key < b.key; });
  return cells;
}

}  // namespace

int thread_count_from_env() {
  if (const char* env = std::getenv("FBMLAB_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

std::vector<ReportRow> run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  const std::string hash = config.hash();
  std::vector<Cell> cells = build_cells(config);

  std::filesystem::path report_file;
  std::filesystem::path timing_file;
  if (options.out_dir) {
    std::filesystem::create_directories(*options.out_dir);
    report_file = *options.out_dir / "report.csv";
    timing_file = *options.out_dir / "timing.csv";
    json echo = config.to_json();
    echo["config_hash"] = hash;
    io::write_file_atomic(*options.out_dir / "config.json", echo.dump(2) + "\n");
    io::write_file_atomic(report_file, ReportRow::csv_header() + "\n");
    io::write_file_atomic(timing_file, "cell,seconds\n");
  }

  const std::size_t n = cells.size();
  std::vector<std::optional<ReportRow>> rows(n);
  std::vector<double> seconds(n, 0.0);
  std::vector<std::exception_ptr> errors(n);
  std::size_t flushed = 0;
  std::mutex mutex;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};

  auto flush_ready = [&] {
    while (flushed < n && rows[flushed]) {
      if (options.out_dir) {
        io::append_line(report_file, rows[flushed]->csv());
        io::append_line(timing_file, std::to_string(flushed) + "," + io::format_double(seconds[flushed]));
      }
      ++flushed;
    }
  };

  auto worker = [&] {
    for (;;) {
      if (failed.load()) return;
      const std::size_t k = next.fetch_add(1);
      if (k >= n) return;
      const auto start = std::chrono::steady_clock::now();
      try {
        ReportRow row = cells[k].run();
        row.config_hash = hash;
        if (row.threshold == 0.0) row.threshold = config.threshold;
        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
        std::lock_guard lock(mutex);
        seconds[k] = elapsed.count();
        rows[k] = std::move(row);
        flush_ready();
      } catch (...) {
        std::lock_guard lock(mutex);
        errors[k] = std::current_exception();
        failed.store(true);
      }
    }
  };

  const int threads = std::max(1, std::min<int>(options.threads > 0 ? options.threads : thread_count_from_env(),
                                                static_cast<int>(std::max<std::size_t>(1, n))));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<ReportRow> out;
  out.reserve(n);
  for (auto& r : rows) out.push_back(std::move(*r));
  return out;
}

namespace {

void expect_kind(const ExperimentConfig& config, std::initializer_list<ExperimentKind> kinds, const char* runner) {
  if (std::find(kinds.begin(), kinds.end(), config.kind) == kinds.end()) {
    throw ConfigError(std::string(runner) + " cannot run '" + to_string(config.kind) + "'");
  }
}

}  // namespace

std::vector<ReportRow> run_dim_formula_experiment(const ExperimentConfig& config) {
  expect_kind(config, {ExperimentKind::dim_formula}, "run_dim_formula_experiment");
  return run_experiment(config);
}

std::vector<ReportRow> run_theorem41_experiment(const ExperimentConfig& config) {
  expect_kind(config, {ExperimentKind::theorem41}, "run_theorem41_experiment");
  return run_experiment(config);
}

std::vector<ReportRow> run_remaining_experiments(const ExperimentConfig& config) {
  expect_kind(config,
              {ExperimentKind::holder_bounds, ExperimentKind::comparison_bounds, ExperimentKind::kernel_scaling,
               ExperimentKind::occupation_l2, ExperimentKind::interior},
              "run_remaining_experiments");
  return run_experiment(config);
}

}  // namespace fbmlab
