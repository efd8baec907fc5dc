#include "hypvar/tabulated_cdf.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hypvar {

namespace {

// Hermite basis on t in [0, 1] for values (y0, y1) and scaled slopes
// (m0, m1) = h * (dy/dx).
double hermite(double t, double y0, double y1, double m0, double m1) {
    const double t2 = t * t;
    const double t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * m0 + (-2 * t3 + 3 * t2) * y1 +
           (t3 - t2) * m1;
}

double hermite_derivative(double t, double y0, double y1, double m0, double m1) {
    const double t2 = t * t;
    return (6 * t2 - 6 * t) * y0 + (3 * t2 - 4 * t + 1) * m0 + (-6 * t2 + 6 * t) * y1 +
           (3 * t2 - 2 * t) * m1;
}

} // namespace

TabulatedCdf::TabulatedCdf(std::vector<double> grid, std::vector<double> cdf_values,
                           std::vector<double> slopes)
    : grid_(std::move(grid)), cdf_(std::move(cdf_values)), slopes_(std::move(slopes)) {
    const std::size_t n = grid_.size();
    if (n < 2 || cdf_.size() != n || slopes_.size() != n) {
        throw std::invalid_argument("TabulatedCdf: grid, values and slopes must match, size >= 2");
    }
    for (std::size_t i = 1; i < n; ++i) {
        if (!(grid_[i] > grid_[i - 1])) {
            throw std::invalid_argument("TabulatedCdf: grid must be strictly increasing");
        }
        if (cdf_[i] < cdf_[i - 1]) {
            throw std::invalid_argument("TabulatedCdf: cdf values must be nondecreasing");
        }
    }
    for (double& s : slopes_) {
        s = std::max(s, 0.0);
    }
    // Fritsch-Carlson: alpha^2 + beta^2 <= 9 on every cell.
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double secant = (cdf_[i + 1] - cdf_[i]) / (grid_[i + 1] - grid_[i]);
        if (secant == 0.0) {
            slopes_[i] = 0.0;
            slopes_[i + 1] = 0.0;
            continue;
        }
        const double alpha = slopes_[i] / secant;
        const double beta = slopes_[i + 1] / secant;
        const double r2 = alpha * alpha + beta * beta;
        if (r2 > 9.0) {
            const double tau = 3.0 / std::sqrt(r2);
            slopes_[i] = tau * alpha * secant;
            slopes_[i + 1] = tau * beta * secant;
        }
    }
}

TabulatedCdf TabulatedCdf::from_density(const RealFunction& density, double x_max, int cells,
                                        const QuadratureSpec& spec) {
    if (!(x_max > 0.0) || cells < 1) {
        throw std::invalid_argument("TabulatedCdf::from_density: need x_max > 0 and cells >= 1");
    }
    std::vector<double> grid(cells + 1);
    std::vector<double> cdf(cells + 1, 0.0);
    std::vector<double> slopes(cells + 1);
    for (int i = 0; i <= cells; ++i) {
        grid[i] = x_max * static_cast<double>(i) / cells;
        slopes[i] = density(grid[i]);
    }
    grid[cells] = x_max;
    double running = 0.0;
    for (int i = 0; i < cells; ++i) {
        running += integrate(density, grid[i], grid[i + 1], spec);
        cdf[i + 1] = running;
    }
    return TabulatedCdf(std::move(grid), std::move(cdf), std::move(slopes));
}

double TabulatedCdf::cell_value(std::size_t cell, double t) const {
    const double h = grid_[cell + 1] - grid_[cell];
    return hermite(t, cdf_[cell], cdf_[cell + 1], h * slopes_[cell], h * slopes_[cell + 1]);
}

double TabulatedCdf::operator()(double x) const {
    if (x <= grid_.front()) {
        return cdf_.front();
    }
    if (x >= grid_.back()) {
        return cdf_.back();
    }
    const auto it = std::upper_bound(grid_.begin(), grid_.end(), x);
    const std::size_t cell = static_cast<std::size_t>(it - grid_.begin()) - 1;
    const double t = (x - grid_[cell]) / (grid_[cell + 1] - grid_[cell]);
    return cell_value(cell, t);
}

double TabulatedCdf::inverse(double u) const {
    if (u <= cdf_.front()) {
        return grid_.front();
    }
    if (u >= cdf_.back()) {
        return grid_.back();
    }
    // First cell whose right value reaches u.
    const auto it = std::lower_bound(cdf_.begin() + 1, cdf_.end(), u);
    const std::size_t cell = static_cast<std::size_t>(it - cdf_.begin()) - 1;
    const double y0 = cdf_[cell];
    const double y1 = cdf_[cell + 1];
    const double h = grid_[cell + 1] - grid_[cell];
    const double m0 = h * slopes_[cell];
    const double m1 = h * slopes_[cell + 1];

    double lo = 0.0;
    double hi = 1.0;
    double t = (y1 > y0) ? (u - y0) / (y1 - y0) : 0.0;
    for (int iter = 0; iter < 100; ++iter) {
        const double g = hermite(t, y0, y1, m0, m1) - u;
        if (g == 0.0) {
            break;
        }
        if (g < 0.0) {
            lo = t;
        } else {
            hi = t;
        }
        const double dg = hermite_derivative(t, y0, y1, m0, m1);
        double next = (dg > 0.0) ? t - g / dg : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) {
            next = 0.5 * (lo + hi);
        }
        if (std::abs(next - t) <= 1e-16 * std::max(1.0, t) || hi - lo <= 1e-16) {
            t = next;
            break;
        }
        t = next;
    }
    return grid_[cell] + t * h;
}

} // namespace hypvar
