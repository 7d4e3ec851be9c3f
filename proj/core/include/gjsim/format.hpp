#pragma once

#include <charconv>
#include <string>

namespace gjsim {

/// Shortest-width text with 17 significant digits; parses back bit-identical.
inline std::string fmt17(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

}  // namespace gjsim
