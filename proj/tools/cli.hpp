#pragma once

#include <string>
#include <vector>

namespace nodal::cli {

enum ExitCode : int { ok = 0, config_error = 2, numerical_error = 3, acceptance_failure = 4 };

// Full command-line entry point. args[0] is the program name.
int run(const std::vector<std::string>& args);

// Version string recorded in manifests.
const char* tool_version();

}  // namespace nodal::cli
