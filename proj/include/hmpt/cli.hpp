#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hmpt {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

// Entry point of the hmpt command. `args` excludes the program name.
// Subcommands: analyze, plan, simulate, campaign, report.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hmpt
