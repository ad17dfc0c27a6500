#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sig::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumerical = 2;
inline constexpr int kExitIo = 3;

// Environment variable naming the default output root (else ./sig-runs).
inline constexpr const char* kOutputRootVariable = "SIG_OUTPUT_ROOT";

// Runs `sig <args...>` in-process; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

std::string version();

}  // namespace sig::cli
