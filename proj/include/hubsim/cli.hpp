#pragma once

#include <ostream>

namespace hubsim {

enum ExitCode : int { exit_ok = 0, exit_divergence = 1, exit_validation = 2, exit_format = 3 };

// Entry point of the hubsim command line; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hubsim
