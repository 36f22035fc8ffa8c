#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ddx {

inline constexpr const char* kToolVersion = "0.1.0";

// Entry point for the `ddx` tool. args excludes the program name.
// Returns 0 on success, 1 on validation/runtime errors, 2 on usage errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ddx
