#pragma once

#include <cmath>
#include <cstdio>
#include <string>

namespace taebp {

/// Locale-independent %.{digits}g rendering; "inf"/"nan" for non-finite values.
inline std::string format_real(double value, int digits = 12) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, value);
    return buf;
}

}  // namespace taebp
