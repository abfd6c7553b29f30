#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mjls::cli {

inline constexpr int kSuccess = 0;
inline constexpr int kDomainFailure = 1;
inline constexpr int kUsageError = 2;

/// Runs one command. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

}  // namespace mjls::cli
