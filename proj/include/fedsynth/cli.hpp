#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace fedsynth {

/// Runs one invocation; `args` excludes the program name. Returns the exit
/// code: 0 success, 1 internal error, 2 user or configuration error. Errors
/// print one "error: <category>: <detail>" line to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fedsynth
