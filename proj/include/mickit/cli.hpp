#pragma once

#include <iosfwd>
#include <string_view>

namespace mickit {

/// Exit statuses of the command-line tool.
enum ExitCode : int { exit_ok = 0, exit_input = 2, exit_precondition = 3, exit_numeric = 4 };

std::string_view tool_version() noexcept;

/// Entry point of the `mickit` tool. Results go to `out` unless --out names a
/// file; diagnostics and human summaries go to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace mickit
