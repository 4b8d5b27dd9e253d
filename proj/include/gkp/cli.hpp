#pragma once

// Command-line front end. Each subcommand runs one sweep or evaluation and
// writes a plot-ready table (CSV or JSON) plus a JSON run manifest holding
// the fully resolved configuration, numerical diagnostics and wall time.
//
// Configuration precedence: flags > --config JSON file > built-in defaults.
// Exit codes: 0 success, 1 I/O or unexpected failure, 2 invalid input,
// 3 convergence failure.

#include <iosfwd>
#include <string>
#include <vector>

namespace gkp::cli {

enum ExitCode : int { ok = 0, failure = 1, invalid_input = 2, not_converged = 3 };

/// Subcommand names in help order.
std::vector<std::string> subcommands();

/// Runs one invocation; `args` excludes the program name. Data written to
/// "-" goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

}  // namespace gkp::cli
