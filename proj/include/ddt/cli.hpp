#pragma once

#include <ostream>

namespace ddt {

/// Exit codes of the `ddt` tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitRegression = 2;

/// Entry point of the `ddt` command line tool.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Built-in oracle checks behind `ddt selftest`. Returns true if all pass.
bool run_selftest(std::ostream& out);

}  // namespace ddt
