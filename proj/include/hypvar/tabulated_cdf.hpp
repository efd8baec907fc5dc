#pragma once

#include "hypvar/quadrature.hpp"

#include <vector>

namespace hypvar {

/*!
 * A cumulative distribution tabulated on a grid and interpolated by a
 * monotone cubic Hermite spline.
 *
 * grid[0] is the left end of the support (0 for length measures) and
 * cdf_values[0] == 0. Nodal slopes are the exact density where one is
 * supplied, limited by the Fritsch-Carlson condition so that the
 * interpolant is nondecreasing on every cell. inverse() solves the cell
 * cubic with safeguarded Newton iteration.
 */
class TabulatedCdf {
public:
    TabulatedCdf(std::vector<double> grid, std::vector<double> cdf_values,
                 std::vector<double> slopes);

    /// Tabulates the integral of `density` on `cells` uniform cells of
    /// [0, x_max], each cell integrated by adaptive quadrature.
    static TabulatedCdf from_density(const RealFunction& density, double x_max, int cells,
                                     const QuadratureSpec& spec = {});

    double total_mass() const { return cdf_.back(); }
    double x_min() const { return grid_.front(); }
    double x_max() const { return grid_.back(); }
    std::size_t size() const { return grid_.size(); }

    /// Interpolated CDF; clamps outside the grid.
    double operator()(double x) const;

    /// Smallest x with cdf(x) = u, for u in [0, total_mass()].
    double inverse(double u) const;

    const std::vector<double>& grid() const { return grid_; }
    const std::vector<double>& cdf_values() const { return cdf_; }

private:
    double cell_value(std::size_t cell, double t) const;

    std::vector<double> grid_;
    std::vector<double> cdf_;
    std::vector<double> slopes_;
};

} // namespace hypvar
