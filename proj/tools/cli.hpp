#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace replicator::cli {

/// Exit statuses of the command-line tool.
enum ExitCode : int { kSuccess = 0, kBadArguments = 2, kNumericFailure = 3 };

/// Runs one command. args excludes the program name. Primary output goes to
/// `out` unless --out names a file; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Parses "start:end:step" or a single number.
std::vector<double> parse_range(const std::string& text);

} // namespace replicator::cli
