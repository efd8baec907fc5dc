#include "hypvar/numerics.hpp"

#include <stdexcept>

namespace hypvar {

double sinh_ratio(double x, int k) {
    if (k < 1) {
        throw std::invalid_argument("sinh_ratio: k must be >= 1");
    }
    if (x == 0.0) {
        return 1.0 / k;
    }
    if (k == 1) {
        return 1.0;
    }
    // sinh(a) = e^a (1 - e^{-2a}) / 2
    const double num = -std::expm1(-x);
    const double den = -std::expm1(-static_cast<double>(k) * x);
    return std::exp(-0.5 * (k - 1) * x) * (num / den);
}

double x_over_sinh_half(double x) {
    if (x == 0.0) {
        return 2.0;
    }
    const double ax = std::abs(x);
    if (ax < 1.0) {
        return x / std::sinh(0.5 * x);
    }
    return 2.0 * ax * std::exp(-0.5 * ax) / (-std::expm1(-ax));
}

double mp_density(double t) {
    if (!(t > 0.0)) {
        return 0.0;
    }
    if (t < 1e-4) {
        const double t2 = t * t;
        return 0.5 * t * (1.0 + t2 / 12.0 + t2 * t2 / 360.0);
    }
    const double s = std::sinh(0.5 * t);
    return 2.0 * s * s / t;
}

} // namespace hypvar
