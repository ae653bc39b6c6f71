#pragma once

// Command-line front end.
//
//   rfsde <subcommand> <config.json> [--seed S] [--out-dir DIR] [--threads N]
//
// Subcommands: simulate, trend, estimate, risk-sweep, state-scaling, asymptotics,
// sigma2. Exit codes: 0 success, 2 config or usage error, 3 numerical
// failure, 4 precondition violation.

#include <iosfwd>
#include <string>
#include <vector>

namespace rfsde {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitPrecondition = 4;

/// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

} // namespace rfsde
