#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "fbmlab/estimators.hpp"
#include "fbmlab/fbm.hpp"
#include "fbmlab/fractal_sets.hpp"
#include "fbmlab/occupation.hpp"

namespace fbmlab::io {

using Json = nlohmann::json;

// Paths: CSV with header t,x1,...,xd.
void write_path_csv(std::ostream& out, const SamplePath& path);
std::string path_csv(const SamplePath& path);
Json path_metadata(const SamplePath& path);

/// Reads t,x1,...,xd rows. The times become the grid of the returned path.
SamplePath read_path_csv(std::istream& in);
SamplePath read_path_csv(const std::filesystem::path& file);

Json to_json(const FractalSet& set);
Json to_json(const DimensionEstimate& estimate);
Json to_json(const BoxCountCurve& curve);
Json to_json(const InteriorReport& report);

std::string curve_csv(const BoxCountCurve& curve);
/// One row per occupied cell: i1,...,id,mass. A non-null config is written
/// first as a "# config: {...}" comment line.
std::string histogram_csv(const OccupationHistogram& hist, const Json& config = nullptr);
Json to_json(const InteriorReport& report, const Json& config);

/// Writes to a sibling temporary file and renames it over `file`.
void write_file_atomic(const std::filesystem::path& file, const std::string& contents);

/// Appends one complete line with a single write call and flushes it to disk.
void append_line(const std::filesystem::path& file, const std::string& line);

/// Shortest round-trip decimal form of a double.
std::string format_double(double value);

}  // namespace fbmlab::io
