#pragma once

// Helpers shared by the command-line front end.

#include <cmath>

namespace busyper {

// bijective plot compression f(x) = sgn(x) log10(1 + |x|)
inline double logcompress(double x) {
    return std::copysign(std::log10(1.0 + std::fabs(x)), x);
}

inline double logexpand(double y) {
    return std::copysign(std::pow(10.0, std::fabs(y)) - 1.0, y);
}

}  // namespace busyper
