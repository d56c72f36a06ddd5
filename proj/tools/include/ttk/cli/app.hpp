#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ttk::cli {

/// Exit codes of the `ttk` executable.
enum ExitCode : int { kOk = 0, kValidation = 2, kCapability = 3, kIo = 4, kInternal = 1 };

/// Runs `ttk <args...>` in-process (args exclude the program name). Reports
/// go to --out when given, otherwise to `out`; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ttk::cli
