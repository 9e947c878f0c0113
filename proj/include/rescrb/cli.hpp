#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rescrb::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumerical = 2;

/// Runs one command line. `args` excludes the program name.
/// Returns 0 on success, 1 on usage or input errors, 2 on numerical or
/// convergence failures.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rescrb::cli
