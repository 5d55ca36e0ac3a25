// cli.hpp: the qfi command-line driver, callable in-process

#pragma once

#include <iosfwd>

namespace qfi::cli {

/// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kValidationError = 2;
inline constexpr int kNumericalError = 3;
inline constexpr int kDiscrepancy = 4;

/// Runs `qfi <command> ...`. The JSON result goes to `out` (or --output)
/// only when the command succeeds far enough to produce one; messages go
/// to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qfi::cli
