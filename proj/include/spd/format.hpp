#ifndef SPD_FORMAT_HPP
#define SPD_FORMAT_HPP

#include <charconv>
#include <string>

namespace spd {

/// Shortest round-trip decimal form; -0 prints as 0.
inline std::string format_double(double v) {
    if (v == 0.0) {
        return "0";
    }
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace spd

#endif
