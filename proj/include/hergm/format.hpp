#ifndef HERGM_FORMAT_HPP
#define HERGM_FORMAT_HPP

#include <charconv>
#include <cmath>
#include <string>

namespace hergm {

/// Shortest decimal text that reads back to the same double; "NA" for
/// non-finite values. Locale independent, so tables are byte-stable.
inline std::string format_double(double x) {
    if (!std::isfinite(x))
        return "NA";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

}  // namespace hergm

#endif
