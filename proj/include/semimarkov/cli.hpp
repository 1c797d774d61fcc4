#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace semimarkov::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 1;
inline constexpr int kExitUsageError = 2;

/// Runs one subcommand (`fit`, `split-fit`, `compare`, `simulate`, `report`).
/// `args` excludes the program name. Diagnostics go to `err`.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace semimarkov::cli
