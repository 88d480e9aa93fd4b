#pragma once

#include <string>
#include <vector>

namespace ratedev::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kEmpty = 2, kInternal = 3 };

/// Runs one `ratedev` invocation; `args` excludes the program name.
int run(const std::vector<std::string>& args);

}  // namespace ratedev::cli
