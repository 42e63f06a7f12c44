#pragma once

#include <ostream>

namespace zonemem::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Entry point of the `zonemem` tool. Subcommands: gen-world, gen-route,
/// replay, compare. Returns 0 on success, 1 on runtime failure, 2 on usage error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace zonemem::cli
