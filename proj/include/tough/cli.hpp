#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tough {

inline constexpr const char* kVersion = "0.1.0";

// Exit codes: 0 success, 1 usage/validation error, 2 model transport error.
// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tough
