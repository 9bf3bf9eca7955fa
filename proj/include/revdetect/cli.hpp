#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace revdetect {

inline constexpr const char* kToolVersion = "0.1.0";

/// Runs one CLI invocation. args excludes the program name.
/// Returns 0 on success, 1 on runtime failure, 2 on usage errors.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace revdetect
