#include "gjms/format.hpp"

#include <charconv>
#include <cmath>

#ifndef GJMS_GIT_DESCRIBE
#define GJMS_GIT_DESCRIBE "unknown"
#endif

namespace gjms {

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) v = 0.0;  // drop the sign of negative zero
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    std::string s(buf, res.ptr);
    if (s.find_first_of(".e") == std::string::npos) s += ".0";
    return s;
}

const char* git_describe() { return GJMS_GIT_DESCRIBE; }

}  // namespace gjms
