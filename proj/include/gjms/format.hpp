#pragma once

#include <string>

namespace gjms {

/// Shortest decimal that reads back to the same double; integral values keep a ".0".
std::string format_number(double v);

/// Output of git describe at configure time, or "unknown".
const char* git_describe();

}  // namespace gjms
