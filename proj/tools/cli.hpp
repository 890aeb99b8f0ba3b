#pragma once

#include <iosfwd>

namespace platesift::cli {

enum ExitCode : int { kOk = 0, kRejected = 1, kUsage = 2, kIo = 3 };

/// Parses argv and dispatches a subcommand. Never throws.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace platesift::cli
