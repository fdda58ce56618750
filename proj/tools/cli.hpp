#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace termweave::cli {

/// Runs one CLI invocation. Returns 0 on success, 1 on usage errors and 2 when
/// the stage fails on its data or on missing prerequisites.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace termweave::cli
