#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fbmlab {

/// Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure.
int cli_main(int argc, const char* const* argv);

/// Parses "2^-4..2^-12" into the dyadic scales 2^-4, ..., 2^-12, or a comma
/// separated list of positive numbers.
std::vector<double> parse_deltas(const std::string& text);

}  // namespace fbmlab
