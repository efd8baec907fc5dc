#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <string>

namespace hypvar {

enum class EndpointHandling {
    none,
    // fn(0) is replaced by QuadratureSpec::limit_at_zero
    removable_singularity_at_zero,
};

struct QuadratureSpec {
    double abs_tol = 1e-12;
    double rel_tol = 1e-10;
    int max_subdivisions = 4000;
    EndpointHandling endpoint_handling = EndpointHandling::none;
    double limit_at_zero = 0.0;

    void validate() const;
};

/// Thrown when adaptive subdivision runs out of budget before meeting the
/// requested tolerance. Carries the best estimate reached so far.
class QuadratureError : public std::runtime_error {
public:
    QuadratureError(const std::string& what, double estimate, double error_bound)
        : std::runtime_error(what), estimate_(estimate), error_bound_(error_bound) {}

    double estimate() const noexcept { return estimate_; }
    double error_bound() const noexcept { return error_bound_; }

private:
    double estimate_;
    double error_bound_;
};

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
    int subdivisions = 0;
};

using RealFunction = std::function<double(double)>;

/*!
 * Globally adaptive Gauss-Kronrod (7/15) integration of fn over [a, b].
 *
 * Panels are bisected in order of largest error estimate until the summed
 * estimate drops below max(abs_tol, rel_tol * |I|).
 */
QuadratureResult integrate_detailed(const RealFunction& fn, double a, double b,
                                    const QuadratureSpec& spec = {});

double integrate(const RealFunction& fn, double a, double b, const QuadratureSpec& spec = {});

/*!
 * Same as integrate() but the initial panels are the intervals between
 * consecutive entries of `breaks`. Use this when the integrand has kinks or
 * narrow features at known abscissas. Breaks outside [breaks.front(),
 * breaks.back()] are not allowed; duplicates are dropped.
 */
double integrate_piecewise(const RealFunction& fn, std::span<const double> breaks,
                           const QuadratureSpec& spec = {});

QuadratureResult integrate_piecewise_detailed(const RealFunction& fn,
                                              std::span<const double> breaks,
                                              const QuadratureSpec& spec = {});

// Fixed 8-point Gauss-Legendre rule on [-1, 1].
struct GaussLegendre8 {
    static constexpr int size = 8;
    static const double nodes[size];
    static const double weights[size];
};

} // namespace hypvar
