#pragma once

#include <string>
#include <vector>

namespace dmad::cli {

enum ExitCode { kOk = 0, kUserError = 1, kInternalError = 2 };

// Parses and runs one command line (argv[0] is the program name).
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);

}  // namespace dmad::cli
