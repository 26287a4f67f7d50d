#pragma once

#include <iosfwd>

namespace stm::cli {

enum ExitCode : int { kSuccess = 0, kConfigError = 2, kRuntimeError = 3 };

/// Entry point shared by the executable and the tests.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace stm::cli
