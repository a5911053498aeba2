#pragma once

// Command-line front end shared by the `subcash` executable and the tests.

#include <ostream>
#include <string>
#include <vector>

namespace subcash {

/// Exit status: 0 ok, 1 a requested check failed, 2 parse, 3 validation,
/// 4 numeric, 5 capacity.
inline constexpr int kExitCheckFailed = 1;

/// Runs one subcommand. `args` excludes the program name. The report goes to
/// `out` only on success (or a failed check); errors go to `err` alone.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "%.12f".
std::string format_fixed(double v);

}  // namespace subcash
