#include "fbmlab/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <regex>
#include <sstream>

#include "fbmlab/estimators.hpp"
#include "fbmlab/experiment.hpp"
#include "fbmlab/fbm.hpp"
#include "fbmlab/gaussian.hpp"
#include "fbmlab/io.hpp"
#include "fbmlab/occupation.hpp"
#include "fbmlab/random.hpp"

namespace fbmlab {

std::vector<double> parse_deltas(const std::string& text) {
  static const std::regex dyadic(R"(\s*2\^-(\d+)\s*\.\.\s*2\^-(\d+)\s*)");
  std::smatch m;
  if (std::regex_match(text, m, dyadic)) {
    const int a = std::stoi(m[1]);
    const int b = std::stoi(m[2]);
    return dyadic_scales(std::min(a, b), std::max(a, b));
  }
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw ConfigError("cannot parse scale '" + item + "'");
    }
    if (used != item.size() || !(v > 0.0 && v <= 1.0)) throw ConfigError("scales must lie in (0,1]: '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("no scales given");
  return out;
}

namespace {

SamplerKind parse_sampler(const std::string& name) {
  if (name == "auto") return SamplerKind::automatic;
  if (name == "cholesky") return SamplerKind::cholesky;
  if (name == "circulant") return SamplerKind::circulant;
  throw ConfigError("unknown sampler '" + name + "'");
}

void emit(const std::string& target, const std::string& contents) {
  if (target == "-") {
    std::cout << contents;
  } else {
    io::write_file_atomic(target, contents);
  }
}

WeightedTimeSet uniform_weights(const TimeGrid& grid) {
  WeightedTimeSet nu;
  nu.times = grid.times();
  nu.weights.assign(grid.size(), 1.0 / static_cast<double>(grid.size()));
  return nu;
}

struct GenerateArgs {
  double hurst = 0.5;
  std::optional<double> alpha_p;
  std::size_t n = 1024;
  int d = 1;
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> seed2;
  std::string sampler = "auto";
  std::string out = "path.csv";
  std::string meta;
};

void run_generate(const GenerateArgs& a) {
  const auto grid = TimeGrid::uniform(a.n);
  SamplerOptions opts;
  opts.kind = parse_sampler(a.sampler);
  const SamplePath path = a.alpha_p ? generate_mixed_path(HurstIndex(a.hurst), HurstIndex(*a.alpha_p), grid, a.d,
                                                          {a.seed, a.seed2.value_or(a.seed + 1)}, opts)
                                    : generate_fbm_path(HurstIndex(a.hurst), grid, a.d, a.seed, opts);
  emit(a.out, io::path_csv(path));
  if (!a.meta.empty()) emit(a.meta, io::path_metadata(path).dump(2) + "\n");
}

struct BoxdimArgs {
  std::string input;
  double hurst = 0.5;
  std::string deltas = "2^-4..2^-12";
  bool points_only = false;
  double trim_coarse = 1.0;
  double trim_fine = 1.0;
  std::string curve;
};

void run_boxdim(const BoxdimArgs& a) {
  const SamplePath path = io::read_path_csv(std::filesystem::path(a.input));
  const GraphCloud cloud = graph_of_path(path, {}, !a.points_only, GraphSource::function_graph);
  const auto deltas = parse_deltas(a.deltas);
  const auto curve = box_count_curve(cloud, deltas, HurstIndex(a.hurst));
  FitOptions fit;
  fit.trim_coarse_octaves = a.trim_coarse;
  fit.trim_fine_octaves = a.trim_fine;
  const auto est = fit_box_dimension(curve, fit);
  if (!a.curve.empty()) emit(a.curve, io::curve_csv(curve));
  std::cout << io::to_json(est).dump(2) << "\n";
}

struct EnergyArgs {
  std::string input;
  double hurst = 0.5;
  double gamma = 1.0;
  std::size_t pairs = 1'000'000;
  std::size_t exact_limit = 4096;
  std::uint64_t seed = 0;
};

void run_energy(const EnergyArgs& a) {
  const SamplePath path = io::read_path_csv(std::filesystem::path(a.input));
  EnergyOptions opts;
  opts.sampled_pairs = a.pairs;
  opts.exact_limit = a.exact_limit;
  opts.seed = a.seed;
  const double energy =
      energy_integral_mc(uniform_weights(path.grid), path.values, a.gamma, HurstIndex(a.hurst), opts);
  std::cout << io::Json{{"energy", energy},
                        {"points", path.size()},
                        {"gamma", a.gamma},
                        {"hurst", a.hurst},
                        {"exact", static_cast<std::size_t>(path.size()) <= a.exact_limit}}
                   .dump(2)
            << "\n";
}

struct OccupancyArgs {
  std::string input;
  double epsilon = 1.0 / 64.0;
  int radius = 2;
  double mass_floor = 0.0;
  std::string hist;
};

void run_occupancy(const OccupancyArgs& a) {
  const SamplePath path = io::read_path_csv(std::filesystem::path(a.input));
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(path.size(), path.dim());
  const auto image = drifted_image(path, zero, uniform_weights(path.grid));
  const auto hist = occupation_histogram(image, a.epsilon);
  const auto report = interior_probe(hist, a.radius);
  if (!a.hist.empty()) emit(a.hist, io::histogram_csv(hist));
  io::Json out = io::to_json(report);
  out["occupied_cells"] = hist.cells.size();
  out["positive_measure_estimate"] = positive_measure_estimate(hist, a.mass_floor);
  out["total_mass"] = hist.total_mass();
  std::cout << out.dump(2) << "\n";
}

struct SweepArgs {
  double hurst = 0.5;
  std::optional<double> alpha_p;
  std::size_t trials = 10'000;
  int max_n = 5;
  std::uint64_t seed = 0;
  double interval_lo = 0.1;
};

void run_gauss_sweep(const SweepArgs& a) {
  if (a.max_n < 1) throw ConfigError("--max-n must be >= 1");
  if (!(a.interval_lo > 0.0 && a.interval_lo < 1.0)) throw ConfigError("--interval-lo must lie in (0,1)");
  const HurstIndex hurst(a.hurst);
  const NormalStream stream(a.seed, StreamId{0x90u, 0});
  std::uint64_t k = 0;
  double min_margin = std::numeric_limits<double>::infinity();
  double max_chain_diff = 0.0;
  double lnd_inf = std::numeric_limits<double>::infinity();
  for (std::size_t trial = 0; trial < a.trials; ++trial) {
    const int n = 1 + static_cast<int>(stream.uniform(k++) * a.max_n) % a.max_n;
    std::vector<double> times;
    for (int i = 0; i < n; ++i) times.push_back(1.0 - stream.uniform(k++));
    std::sort(times.begin(), times.end());
    if (std::adjacent_find(times.begin(), times.end()) != times.end()) continue;
    min_margin = std::min(min_margin, verify_detcov_lower_bound(times, hurst));
    const auto chain = detcov_chain_identity(GaussianVectorSpec::fbm(times, hurst));
    max_chain_diff = std::max(max_chain_diff, std::abs(chain.det - chain.chain_product) / std::abs(chain.det));
    if (a.alpha_p) {
      const double u = a.interval_lo + (1.0 - a.interval_lo) * stream.uniform(k++);
      std::vector<double> cond;
      for (double t : times) cond.push_back(a.interval_lo + (1.0 - a.interval_lo) * t);
      if (std::find(cond.begin(), cond.end(), u) != cond.end()) continue;
      lnd_inf = std::min(lnd_inf, lnd_margin(hurst, HurstIndex(*a.alpha_p), u, cond));
    }
  }
  io::Json out{{"hurst", a.hurst},
               {"trials", a.trials},
               {"max_n", a.max_n},
               {"detcov_min_margin", min_margin},
               {"chain_max_relative_difference", max_chain_diff}};
  if (a.alpha_p) {
    out["alpha_p"] = *a.alpha_p;
    out["lnd_inf_ratio"] = lnd_inf;
  }
  std::cout << out.dump(2) << "\n";
}

struct ExperimentArgs {
  std::string config;
  std::string out;
  int threads = 0;
};

void run_experiment_cmd(const ExperimentArgs& a) {
  std::ifstream in(a.config);
  if (!in) throw ConfigError("cannot open config " + a.config);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  const auto config = ExperimentConfig::from_json(doc);
  RunOptions opts;
  opts.out_dir = !a.out.empty() ? a.out : (!config.output.empty() ? config.output : std::string("results"));
  opts.threads = a.threads;
  const auto rows = run_experiment(config, opts);
  const auto passed = std::count_if(rows.begin(), rows.end(), [](const ReportRow& r) { return r.pass; });
  std::cout << rows.size() << " rows, " << passed << " passing, report in " << (*opts.out_dir / "report.csv").string()
            << "\n";
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"Numerical lab for fractional Brownian motion graphs, images and occupation measures"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Sample an fBm (or mixed) path on a uniform grid and write it as CSV");
  g->add_option("--hurst", gen.hurst, "Hurst index H")->required();
  g->add_option("--alpha-p", gen.alpha_p, "Add an independent fBm of this index");
  g->add_option("--n", gen.n, "Number of grid steps (n+1 points)");
  g->add_option("--d", gen.d, "Spatial dimension");
  g->add_option("--seed", gen.seed, "Seed");
  g->add_option("--seed2", gen.seed2, "Seed of the second component (default seed+1)");
  g->add_option("--sampler", gen.sampler, "auto, cholesky or circulant");
  g->add_option("--out", gen.out, "Output CSV ('-' for stdout)");
  g->add_option("--meta", gen.meta, "Also write a JSON envelope here");

  BoxdimArgs box;
  auto* b = app.add_subcommand("boxdim", "Parabolic box-counting dimension of a path graph");
  b->add_option("--input", box.input, "Path CSV (t,x1,...,xd)")->required();
  b->add_option("--hurst", box.hurst, "Parabolic index H of the boxes")->required();
  b->add_option("--deltas", box.deltas, "Scales, e.g. 2^-4..2^-12 or 0.1,0.05");
  b->add_flag("--points-only", box.points_only, "Count sample points only, without joining them");
  b->add_option("--trim-coarse", box.trim_coarse, "Octaves dropped at the coarse end");
  b->add_option("--trim-fine", box.trim_fine, "Octaves dropped at the fine end");
  b->add_option("--curve", box.curve, "Write the box-count curve CSV here");

  EnergyArgs en;
  auto* e = app.add_subcommand("energy", "rho_H energy integral of the uniform measure on a path graph");
  e->add_option("--input", en.input, "Path CSV")->required();
  e->add_option("--hurst", en.hurst, "Hurst index H")->required();
  e->add_option("--gamma", en.gamma, "Energy exponent gamma")->required();
  e->add_option("--pairs", en.pairs, "Sampled pairs above the exact limit");
  e->add_option("--exact-limit", en.exact_limit, "Largest point count summed exactly");
  e->add_option("--seed", en.seed, "Seed for pair sampling");

  OccupancyArgs occ;
  auto* o = app.add_subcommand("occupancy", "Occupation histogram and interior probe of a path image");
  o->add_option("--input", occ.input, "Path CSV")->required();
  o->add_option("--epsilon", occ.epsilon, "Cell size");
  o->add_option("--radius", occ.radius, "Interior radius in cells");
  o->add_option("--mass-floor", occ.mass_floor, "Density floor for the positive-measure estimate");
  o->add_option("--hist", occ.hist, "Write the sparse histogram CSV here");

  SweepArgs sw;
  auto* s = app.add_subcommand("gauss-sweep", "Randomized determinant and nondeterminism checks");
  s->add_option("--hurst", sw.hurst, "Hurst index H")->required();
  s->add_option("--alpha-p", sw.alpha_p, "Second index for the mixed-process ratio");
  s->add_option("--trials", sw.trials, "Number of random configurations");
  s->add_option("--max-n", sw.max_n, "Largest number of times per configuration");
  s->add_option("--seed", sw.seed, "Seed");
  s->add_option("--interval-lo", sw.interval_lo, "Left end of the interval for the mixed-process ratio");

  ExperimentArgs ex;
  auto* x = app.add_subcommand("experiment", "Run a configured experiment suite");
  x->add_option("--config", ex.config, "Experiment JSON")->required();
  x->add_option("--out", ex.out, "Output directory");
  x->add_option("--threads", ex.threads, "Worker threads (default: FBMLAB_THREADS or core count)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    std::cerr << err.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (g->parsed()) run_generate(gen);
    if (b->parsed()) run_boxdim(box);
    if (e->parsed()) run_energy(en);
    if (o->parsed()) run_occupancy(occ);
    if (s->parsed()) run_gauss_sweep(sw);
    if (x->parsed()) run_experiment_cmd(ex);
  } catch (const DomainError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  } catch (const NumericalError& err) {
    std::cerr << "numerical failure: " << err.what() << "\n";
    return 2;
  } catch (const std::filesystem::filesystem_error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  } catch (const std::exception& err) {
    std::cerr << "numerical failure: " << err.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace fbmlab
