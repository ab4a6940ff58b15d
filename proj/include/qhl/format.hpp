// format.hpp — lossless text formatting for floating-point artifacts.

#pragma once

#include <cstdio>
#include <string>

namespace qhl {

// 17 significant digits round-trip IEEE doubles exactly.
inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

}  // namespace qhl
