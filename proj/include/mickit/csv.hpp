#pragma once

#include "mickit/sample.hpp"

#include <istream>
#include <string>

namespace mickit {

/// Reads a two-column numeric CSV (comma separated, '.' decimal). A first row
/// that does not parse as numbers is treated as a header. Blank lines are
/// skipped. Malformed rows and non-finite values raise InputError naming the
/// line number.
SampleData read_csv_sample(std::istream& in);
SampleData read_csv_file(const std::string& path);

} // namespace mickit
