#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace harmonica::cli {

inline constexpr const char* kVersion = "1.0.0";

enum ExitCode : int { ok = 0, failure = 1, validation = 2, tolerance = 3 };

/// Runs one command line (argv[0] is the program name). Diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& err);

}  // namespace harmonica::cli
