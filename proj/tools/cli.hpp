#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace iochunk::tools {

/// Exit codes: 0 success, 1 input/format error, 2 verification failure.
enum ExitCode : int { kExitOk = 0, kExitInputError = 1, kExitVerifyFailure = 2 };

/// Runs the command line `args` (args[0] is the program name). Primary
/// output goes to `out` when the destination is "-"; diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace iochunk::tools
