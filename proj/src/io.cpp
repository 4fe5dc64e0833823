#include "fbmlab/io.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

namespace fbmlab::io {

std::string format_double(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

void write_path_csv(std::ostream& out, const SamplePath& path) {
  out << 't';
  for (Eigen::Index j = 0; j < path.dim(); ++j) out << ",x" << (j + 1);
  out << '\n';
  for (Eigen::Index i = 0; i < path.size(); ++i) {
    out << format_double(path.grid[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < path.dim(); ++j) out << ',' << format_double(path.values(i, j));
    out << '\n';
  }
}

std::string path_csv(const SamplePath& path) {
  std::ostringstream out;
  write_path_csv(out, path);
  return out.str();
}

Json path_metadata(const SamplePath& path) {
  return Json{{"points", path.size()},
              {"dim", path.dim()},
              {"hurst", path.hurst_components},
              {"seeds", path.seeds},
              {"sampler", to_string(path.sampler)},
              {"grid", path.grid.is_uniform() ? Json{{"kind", "uniform"}, {"n_steps", path.grid.size() - 1}}
                                              : Json{{"kind", "explicit"}, {"points", path.grid.size()}}}};
}

SamplePath read_path_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DomainError("path CSV is empty");
  const auto columns = static_cast<Eigen::Index>(std::count(line.begin(), line.end(), ',') + 1);
  if (columns < 2 || line.rfind('t', 0) != 0) throw DomainError("path CSV header must be t,x1,...,xd");

  std::vector<double> times;
  std::vector<double> flat;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const char* p = line.data();
    const char* end = p + line.size();
    for (Eigen::Index c = 0; c < columns; ++c) {
      double v = 0.0;
      const auto res = std::from_chars(p, end, v);
      if (res.ec != std::errc()) throw DomainError("path CSV: bad number on line " + std::to_string(row));
      (c == 0 ? times : flat).push_back(v);
      p = res.ptr;
      if (c + 1 < columns) {
        if (p == end || *p != ',') throw DomainError("path CSV: wrong column count on line " + std::to_string(row));
        ++p;
      }
    }
    if (p != end && *p != '\r') throw DomainError("path CSV: trailing data on line " + std::to_string(row));
  }
  SamplePath path;
  path.grid = TimeGrid(std::move(times));
  const auto n = static_cast<Eigen::Index>(path.grid.size());
  path.values = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      flat.data(), n, columns - 1);
  return path;
}

SamplePath read_path_csv(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw DomainError("cannot open " + file.string());
  return read_path_csv(in);
}

Json to_json(const FractalSet& set) {
  Json intervals = Json::array();
  for (const auto& iv : set.intervals) intervals.push_back({iv.lo, iv.hi});
  return Json{{"kind", to_string(set.kind)},       {"branches", set.branches},
              {"ratio", set.ratio},                {"generation", set.generation},
              {"theoretical_dim", set.theoretical_dim}, {"intervals", intervals}};
}

Json to_json(const DimensionEstimate& e) {
  return Json{{"exponent", e.exponent},   {"intercept", e.intercept}, {"r_squared", e.r_squared},
              {"delta_min", e.delta_min}, {"delta_max", e.delta_max}, {"n_points_used", e.n_points_used}};
}

Json to_json(const BoxCountCurve& curve) { return Json{{"deltas", curve.deltas}, {"counts", curve.counts}}; }

Json to_json(const InteriorReport& r) {
  return Json{{"cell_size", r.cell_size},
              {"radius_cells", r.radius_cells},
              {"interior_cells", r.interior_cells},
              {"fraction_of_seeds_with_interior", r.fraction_of_seeds_with_interior},
              {"seeds", r.seeds}};
}

Json to_json(const InteriorReport& report, const Json& config) {
  Json out = to_json(report);
  out["config"] = config;
  return out;
}

std::string curve_csv(const BoxCountCurve& curve) {
  std::ostringstream out;
  out << "delta,count\n";
  for (std::size_t k = 0; k < curve.deltas.size(); ++k) {
    out << format_double(curve.deltas[k]) << ',' << curve.counts[k] << '\n';
  }
  return out.str();
}

std::string histogram_csv(const OccupationHistogram& hist, const Json& config) {
  std::ostringstream out;
  if (!config.is_null()) out << "# config: " << config.dump() << '\n';
  for (Eigen::Index j = 0; j < hist.dim(); ++j) out << 'i' << (j + 1) << ',';
  out << "mass\n";
  for (const auto& [cell, mass] : hist.cells) {
    for (auto idx : cell) out << idx << ',';
    out << format_double(mass) << '\n';
  }
  return out.str();
}

void write_file_atomic(const std::filesystem::path& file, const std::string& contents) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  auto tmp = file;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DomainError("cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw DomainError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, file);
}

void append_line(const std::filesystem::path& file, const std::string& line) {
  const std::string payload = line.ends_with('\n') ? line : line + '\n';
  const int fd = ::open(file.c_str(), O_WRONLY | O_APPEND | O_CREAT, 0644);
  if (fd < 0) throw DomainError("cannot open " + file.string() + ": " + std::strerror(errno));
  const auto written = ::write(fd, payload.data(), payload.size());
  const bool ok = written == static_cast<ssize_t>(payload.size()) && ::fsync(fd) == 0;
  ::close(fd);
  if (!ok) throw DomainError("append failed for " + file.string());
}

}  // namespace fbmlab::io
