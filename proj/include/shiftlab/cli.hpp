#pragma once

#include <string>
#include <vector>

namespace shiftlab {

// Full command-line entry point. `args` excludes the program name.
// Returns the process exit code: 0 success, 1 validation/usage error,
// 2 infeasibility or generator failure. Errors are reported on stderr as
// `ERROR <kind> <message>`.
int run_cli(const std::vector<std::string>& args);

}  // namespace shiftlab
