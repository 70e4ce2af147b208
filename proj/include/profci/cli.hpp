#pragma once

#include <iosfwd>

namespace profci {

// Entry point behind the profci binary; argv as handed to main. Human
// output and rendered reports go to out, diagnostics to err. Returns the
// process exit status: 0 success, 1 student suite failed, 2 configuration
// or input error, 3 forge or report endpoint unreachable after retries.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace profci
