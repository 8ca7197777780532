#pragma once

#include <iosfwd>

namespace sublin {

// Parses argv, runs the requested subcommand, and writes the report to out
// and diagnostics to err. Returns 0 on success, 1 when an audit check fails,
// and 2 on argument, parse, or input errors.
int cli_run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sublin
