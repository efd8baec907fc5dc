#pragma once

#include <cmath>

namespace hypvar {

/*!
 * sinh(x/2) / sinh(k x/2) for x >= 0, k >= 1.
 *
 * Evaluated as exp(-(k-1)x/2) * expm1(-x) / expm1(-k x), which never forms
 * a large intermediate, so it is safe far beyond x = 1400. Returns the
 * limit 1/k at x = 0. The result never exceeds 1/k.
 */
double sinh_ratio(double x, int k);

/// x / sinh(x/2), with the limit 2 at x = 0 and no overflow for large x.
double x_over_sinh_half(double x);

/// Mirzakhani-Petri density 2 sinh^2(t/2) / t, equal to (cosh t - 1)/t.
/// Uses its Taylor series t/2 + t^3/24 near 0. Returns 0 for t <= 0.
double mp_density(double t);

// Neumaier's variant of Kahan summation.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            compensation_ += (sum_ - t) + x;
        } else {
            compensation_ += (x - t) + sum_;
        }
        sum_ = t;
    }

    CompensatedSum& operator+=(double x) {
        add(x);
        return *this;
    }

    double value() const { return sum_ + compensation_; }

private:
    double sum_ = 0.0;
    double compensation_ = 0.0;
};

} // namespace hypvar
