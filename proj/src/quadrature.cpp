#include "hypvar/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>
#include <vector>

namespace hypvar {

namespace {

// Kronrod abscissae and weights (QUADPACK qk15); every odd index is a
// Gauss point.
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double a;
    double b;
    double value;
    double error;

    bool operator<(const Panel& other) const { return error < other.error; }
};

Panel gauss_kronrod(const RealFunction& fn, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);

    const double fc = fn(center);
    double kronrod = fc * kWgk[7];
    double gauss = fc * kWg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kXgk[j];
        const double fsum = fn(center - dx) + fn(center + dx);
        kronrod += kWgk[j] * fsum;
        if (j % 2 == 1) {
            gauss += kWg[j / 2] * fsum;
        }
    }
    kronrod *= half;
    gauss *= half;
    return Panel{a, b, kronrod, std::abs(kronrod - gauss)};
}

} // namespace

const double GaussLegendre8::nodes[GaussLegendre8::size] = {
    -0.960289856497536231683560868569473, -0.796666477413626739591553936475830,
    -0.525532409916328985817739049189246, -0.183434642495649804939476142360184,
    0.183434642495649804939476142360184,  0.525532409916328985817739049189246,
    0.796666477413626739591553936475830,  0.960289856497536231683560868569473};
const double GaussLegendre8::weights[GaussLegendre8::size] = {
    0.101228536290376259152531354309962, 0.222381034453374470544355994426241,
    0.313706645877887287337962201986601, 0.362683783378361982965150449277196,
    0.362683783378361982965150449277196, 0.313706645877887287337962201986601,
    0.222381034453374470544355994426241, 0.101228536290376259152531354309962};

void QuadratureSpec::validate() const {
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) {
        throw std::invalid_argument("QuadratureSpec: tolerances must be positive");
    }
    if (max_subdivisions < 1) {
        throw std::invalid_argument("QuadratureSpec: max_subdivisions must be >= 1");
    }
}

QuadratureResult integrate_piecewise_detailed(const RealFunction& fn,
                                              std::span<const double> breaks,
                                              const QuadratureSpec& spec) {
    spec.validate();
    if (breaks.size() < 2) {
        throw std::invalid_argument("integrate_piecewise: need at least two breakpoints");
    }
    if (!std::is_sorted(breaks.begin(), breaks.end())) {
        throw std::invalid_argument("integrate_piecewise: breakpoints must be sorted");
    }
    for (double x : breaks) {
        if (!std::isfinite(x)) {
            throw std::invalid_argument("integrate_piecewise: breakpoints must be finite");
        }
    }

    RealFunction guarded;
    const RealFunction* integrand = &fn;
    if (spec.endpoint_handling == EndpointHandling::removable_singularity_at_zero) {
        guarded = [&fn, limit = spec.limit_at_zero](double x) {
            return x == 0.0 ? limit : fn(x);
        };
        integrand = &guarded;
    }

    std::priority_queue<Panel> panels;
    double total = 0.0;
    double total_error = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        if (breaks[i + 1] <= breaks[i]) {
            continue;
        }
        Panel p = gauss_kronrod(*integrand, breaks[i], breaks[i + 1]);
        total += p.value;
        total_error += p.error;
        panels.push(p);
    }

    // Panels too narrow to bisect further are parked here; their error
    // stays in the budget.
    std::vector<Panel> parked;
    int subdivisions = 0;
    while (!panels.empty()) {
        const double target = std::max(spec.abs_tol, spec.rel_tol * std::abs(total));
        if (total_error <= target) {
            return QuadratureResult{total, total_error, subdivisions};
        }
        if (subdivisions >= spec.max_subdivisions) {
            break;
        }
        Panel worst = panels.top();
        panels.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            parked.push_back(worst);
            continue;
        }
        Panel left = gauss_kronrod(*integrand, worst.a, mid);
        Panel right = gauss_kronrod(*integrand, mid, worst.b);
        total += left.value + right.value - worst.value;
        total_error += left.error + right.error - worst.error;
        panels.push(left);
        panels.push(right);
        ++subdivisions;
    }

    // Re-sum from the remaining panels to shed accumulated rounding in the
    // running totals before the final check.
    double resummed = 0.0;
    double resummed_error = 0.0;
    std::vector<Panel> rest = std::move(parked);
    while (!panels.empty()) {
        rest.push_back(panels.top());
        panels.pop();
    }
    for (const Panel& p : rest) {
        resummed += p.value;
        resummed_error += p.error;
    }
    const double target = std::max(spec.abs_tol, spec.rel_tol * std::abs(resummed));
    if (resummed_error <= target) {
        return QuadratureResult{resummed, resummed_error, subdivisions};
    }
    std::ostringstream msg;
    msg.precision(6);
    msg << "quadrature did not converge after " << subdivisions
        << " subdivisions (estimate " << resummed << ", error bound " << resummed_error
        << ", target " << target << ")";
    throw QuadratureError(msg.str(), resummed, resummed_error);
}

double integrate_piecewise(const RealFunction& fn, std::span<const double> breaks,
                           const QuadratureSpec& spec) {
    return integrate_piecewise_detailed(fn, breaks, spec).value;
}

QuadratureResult integrate_detailed(const RealFunction& fn, double a, double b,
                                    const QuadratureSpec& spec) {
    if (!(a < b)) {
        throw std::invalid_argument("integrate: require a < b");
    }
    const double breaks[2] = {a, b};
    return integrate_piecewise_detailed(fn, breaks, spec);
}

double integrate(const RealFunction& fn, double a, double b, const QuadratureSpec& spec) {
    return integrate_detailed(fn, a, b, spec).value;
}

} // namespace hypvar
