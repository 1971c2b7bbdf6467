#pragma once

#include <exception>
#include <iosfwd>

namespace fieldctl {

enum ExitCode : int {
    kExitOk = 0,
    kExitValidation = 2,
    kExitNumerical = 3,
    kExitIo = 4,
};

/// Exit code for a failure escaping a subcommand.
int exit_code(const std::exception& e);

/// Whole command-line driver; returns the process exit code.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fieldctl
