#pragma once

#include <ostream>

namespace casym {

// Entry point of the `casym` command. Returns the process exit status:
// 0 success, 1 invalid input, 2 numerical non-convergence.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace casym
