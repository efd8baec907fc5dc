#pragma once

#include "hypvar/quadrature.hpp"
#include "hypvar/random.hpp"
#include "hypvar/tabulated_cdf.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace hypvar {

struct SamplerBudget {
    double max_expected_points = 2e7;
    double max_x_max = 24.0;

    void validate() const;
};

/// Number of cells in the tabulated CDF used by the sampler.
inline constexpr int kDefaultCdfCells = 4096;

/*!
 * Mirzakhani-Petri intensity nu(dt) = 2 sinh^2(t/2)/t dt restricted to
 * (0, x_max].
 *
 * x_max == 0 is accepted as the degenerate empty measure. Immutable once
 * built; share one instance across replicates and threads.
 */
class IntensityMeasure {
public:
    explicit IntensityMeasure(double x_max, int cdf_cells = kDefaultCdfCells);

    static double density(double t);

    double x_max() const { return x_max_; }
    /// Lambda(x_max) by direct adaptive quadrature.
    double total_mass() const { return total_mass_; }
    /// Lambda(b) - Lambda(a) for 0 <= a <= b <= x_max.
    double mass(double a, double b) const;
    bool degenerate() const { return !cdf_.has_value(); }
    const TabulatedCdf& cdf() const { return cdf_.value(); }

private:
    double x_max_;
    double total_mass_ = 0.0;
    std::optional<TabulatedCdf> cdf_;
};

/// Lambda(x_max) = int_0^x_max 2 sinh^2(t/2)/t dt.
double intensity_mass(double x_max, const QuadratureSpec& spec = {});

struct SampledSource {
    std::uint64_t root_seed = 0;
    std::uint64_t stream_index = 0;
    double x_max = 0.0;
};

struct IngestedSource {
    std::string path;
    std::optional<int> genus;
};

/// A finite multiset of positive lengths, kept sorted ascending.
struct LengthConfiguration {
    std::vector<double> lengths;
    std::variant<SampledSource, IngestedSource> source;

    std::size_t count() const { return lengths.size(); }

    /// Sorts and checks positivity/finiteness; throws std::invalid_argument.
    static LengthConfiguration from_lengths(std::vector<double> lengths,
                                            IngestedSource source = {});

    /// Points in (0, x] only.
    LengthConfiguration restricted_to(double x) const;
};

/*!
 * Draws one realization of the Poisson process on (0, x_max]: a
 * Poisson(Lambda) count, then i.i.d. inverse-CDF points. Throws BudgetError
 * when Lambda or x_max exceed the budget.
 */
LengthConfiguration sample(const IntensityMeasure& measure, RngStream& rng,
                           const SamplerBudget& budget = {});

/// Throws BudgetError if sampling `measure` would exceed `budget`.
void check_budget(const IntensityMeasure& measure, const SamplerBudget& budget);

/// E[sum_x h(x)] = int h dnu over (0, x_max]. Optional interior breakpoints
/// mark kinks of h.
double campbell_oracle(const std::function<double(double)>& h, const IntensityMeasure& measure,
                       std::span<const double> breaks = {}, const QuadratureSpec& spec = {});

/// E[sum_{x != y} h(x, y)] = double integral of h against nu x nu.
double factorial_moment2_oracle(const std::function<double(double, double)>& h,
                                const IntensityMeasure& measure,
                                const QuadratureSpec& spec = {});

/*!
 * Reads a length spectrum: one positive decimal per line, optional
 * "# genus=G" header, blank lines and other '#' lines ignored. Throws
 * ParseError with the offending line number.
 */
LengthConfiguration read_length_file(const std::string& path);
LengthConfiguration parse_lengths(std::istream& in, const std::string& origin);

/// Writes the normalized form: header lines then one %.17g length per line.
void write_length_file(std::ostream& out, const LengthConfiguration& cfg);

} // namespace hypvar
