#pragma once

#include <charconv>
#include <cmath>
#include <string>

namespace egan {

// Shortest decimal that reads back to the same double.
inline std::string format_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

}  // namespace egan
