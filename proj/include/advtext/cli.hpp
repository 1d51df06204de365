#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace advtext::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kInvariant = 3 };

// Entry point shared by the executable and the tests. argv[0] is the program name.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace advtext::cli
