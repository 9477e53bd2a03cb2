#pragma once

#include <span>

#include "trajphase/errors.hpp"

namespace trajphase {

/// Composite Simpson rule over equally spaced samples. An odd number of
/// intervals closes with Simpson's 3/8 rule on the last three.
inline double simpson(std::span<const double> f, double h) {
    if (f.empty()) throw InvalidArgument("simpson: no samples");
    const std::size_t n = f.size() - 1;  // intervals
    if (n == 0) return 0.0;
    if (n == 1) return 0.5 * h * (f[0] + f[1]);
    if (n == 2) return h / 3.0 * (f[0] + 4 * f[1] + f[2]);
    std::size_t even_end = (n % 2 == 0) ? n : n - 3;
    double s = 0.0;
    for (std::size_t k = 0; k + 2 <= even_end; k += 2) s += f[k] + 4 * f[k + 1] + f[k + 2];
    s *= h / 3.0;
    if (even_end != n) {
        const std::size_t k = even_end;
        s += 3.0 * h / 8.0 * (f[k] + 3 * f[k + 1] + 3 * f[k + 2] + f[k + 3]);
    }
    return s;
}

}  // namespace trajphase
