#pragma once

#include <iosfwd>

namespace stwall {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitInfeasible = 3;

/// Name of the environment variable that replaces the built-in material
/// database with a JSON file.
inline constexpr const char* kMaterialsEnv = "STWALL_MATERIALS";

/// Entry point of the `stwall` tool; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace stwall
