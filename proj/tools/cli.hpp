#pragma once

#include <iosfwd>

namespace cradle::cli {

enum ExitCode : int { ok = 0, usage_error = 1, numerical_failure = 2 };

/// Parses argv (argv[0] is the program name), runs one subcommand and returns its exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cradle::cli
