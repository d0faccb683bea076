#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace threshcal {

/// Entry point of the `threshcal` tool. `args` excludes the program name.
/// Returns 0 on success, 1 on runtime errors, 2 on usage errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace threshcal
