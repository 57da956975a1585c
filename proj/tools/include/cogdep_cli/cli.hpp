#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace cogdep::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitPrecondition = 4;
inline constexpr int kExitInternal = 1;

// Runs one command line (args[0] is the program name) and returns the exit
// code. Normal output goes to out, diagnostics to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// "p:100-p" with p the rounded percentage for p* of the given entropy.
std::string odds_string(double probability);

}  // namespace cogdep::cli
