#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace prune {

enum ExitCode : int { kOk = 0, kRuleFailure = 1, kInputError = 2, kRuntimeFailure = 3 };

/// The `prune` command line. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace prune
