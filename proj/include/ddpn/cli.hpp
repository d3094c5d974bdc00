#pragma once

#include <string>
#include <vector>

namespace ddpn {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitDivergence = 3;
inline constexpr int kExitIo = 4;

// Parses and executes one ddpnkit invocation. Messages go to stdout/stderr;
// the return value is the process exit code.
int run_cli(const std::vector<std::string>& args);
int run_cli(int argc, const char* const* argv);

}  // namespace ddpn
