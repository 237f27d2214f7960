#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace uwh::cli {

/// Runs one invocation; `args` excludes the program name. Data goes to `out`,
/// diagnostics to `err`. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace uwh::cli
