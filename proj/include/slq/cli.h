#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace slq::cli {

inline constexpr int kSchemaVersion = 1;

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kValidation = 2,
  kNumerical = 3,
};

/// Runs the command line `args` (without the program name). Primary output
/// goes to `out`; diagnostics and JSON error records go to `err`.
int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

/// Parses "1", "1,2", "1 2" or "[1, 2]".
std::vector<double> ParseVector(const std::string& text);

/// Shortest representation that reads back to the same double.
std::string FormatDouble(double x);

}  // namespace slq::cli
