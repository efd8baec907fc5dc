#include "hypvar/point_process.hpp"

#include "hypvar/errors.hpp"
#include "hypvar/numerics.hpp"
#include "hypvar/text_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hypvar {

namespace {

QuadratureSpec mass_spec() {
    QuadratureSpec spec;
    spec.abs_tol = 1e-300;
    spec.rel_tol = 1e-13;
    spec.endpoint_handling = EndpointHandling::removable_singularity_at_zero;
    spec.limit_at_zero = 0.0;
    return spec;
}

// Unit-width panels keep the exponential growth of the density easy on
// the adaptive rule.
std::vector<double> unit_breaks(double a, double b) {
    std::vector<double> breaks{a};
    for (double x = std::floor(a) + 1.0; x < b; x += 1.0) {
        breaks.push_back(x);
    }
    breaks.push_back(b);
    return breaks;
}

} // namespace

void SamplerBudget::validate() const {
    if (!(max_expected_points > 0.0) || !(max_x_max > 0.0)) {
        throw std::invalid_argument("SamplerBudget: limits must be positive");
    }
}

double IntensityMeasure::density(double t) {
    return mp_density(t);
}

IntensityMeasure::IntensityMeasure(double x_max, int cdf_cells) : x_max_(x_max) {
    if (!(x_max >= 0.0) || !std::isfinite(x_max)) {
        throw std::invalid_argument("IntensityMeasure: x_max must be finite and >= 0");
    }
    if (x_max == 0.0) {
        return;
    }
    total_mass_ = intensity_mass(x_max);
    cdf_ = TabulatedCdf::from_density(&mp_density, x_max, cdf_cells, mass_spec());
}

double IntensityMeasure::mass(double a, double b) const {
    if (!(0.0 <= a && a <= b && b <= x_max_)) {
        throw std::invalid_argument("IntensityMeasure::mass: need 0 <= a <= b <= x_max");
    }
    if (a == b) {
        return 0.0;
    }
    return integrate_piecewise(&mp_density, unit_breaks(a, b), mass_spec());
}

double intensity_mass(double x_max, const QuadratureSpec& spec) {
    if (!(x_max > 0.0)) {
        throw std::invalid_argument("intensity_mass: x_max must be > 0");
    }
    QuadratureSpec s = spec;
    s.endpoint_handling = EndpointHandling::removable_singularity_at_zero;
    s.limit_at_zero = 0.0;
    return integrate_piecewise(&mp_density, unit_breaks(0.0, x_max), s);
}

LengthConfiguration LengthConfiguration::from_lengths(std::vector<double> lengths,
                                                      IngestedSource source) {
    for (double x : lengths) {
        if (!(x > 0.0) || !std::isfinite(x)) {
            throw std::invalid_argument("LengthConfiguration: lengths must be positive and finite");
        }
    }
    std::sort(lengths.begin(), lengths.end());
    LengthConfiguration cfg;
    cfg.lengths = std::move(lengths);
    cfg.source = std::move(source);
    return cfg;
}

LengthConfiguration LengthConfiguration::restricted_to(double x) const {
    LengthConfiguration out;
    out.source = source;
    const auto end = std::upper_bound(lengths.begin(), lengths.end(), x);
    out.lengths.assign(lengths.begin(), end);
    return out;
}

void check_budget(const IntensityMeasure& measure, const SamplerBudget& budget) {
    budget.validate();
    if (measure.x_max() > budget.max_x_max) {
        std::ostringstream msg;
        msg << "sampler budget: x_max " << measure.x_max() << " exceeds max_x_max "
            << budget.max_x_max << " (expected " << measure.total_mass() << " points)";
        throw BudgetError(msg.str(), measure.total_mass());
    }
    if (measure.total_mass() > budget.max_expected_points) {
        std::ostringstream msg;
        msg << "sampler budget: expected " << measure.total_mass()
            << " points exceeds max_expected_points " << budget.max_expected_points;
        throw BudgetError(msg.str(), measure.total_mass());
    }
}

LengthConfiguration sample(const IntensityMeasure& measure, RngStream& rng,
                           const SamplerBudget& budget) {
    check_budget(measure, budget);
    LengthConfiguration cfg;
    cfg.source = SampledSource{rng.root_seed(), rng.stream_index(), measure.x_max()};
    if (measure.degenerate()) {
        return cfg;
    }
    const double mass = measure.cdf().total_mass();
    const std::int64_t n = poisson_draw(mass, rng, budget.max_expected_points);
    cfg.lengths.reserve(static_cast<std::size_t>(n));
    const TabulatedCdf& cdf = measure.cdf();
    for (std::int64_t i = 0; i < n; ++i) {
        double x = cdf.inverse(rng.uniform01() * mass);
        if (!(x > 0.0)) {
            x = std::nextafter(0.0, 1.0);
        }
        cfg.lengths.push_back(std::min(x, measure.x_max()));
    }
    std::sort(cfg.lengths.begin(), cfg.lengths.end());
    return cfg;
}

double campbell_oracle(const std::function<double(double)>& h, const IntensityMeasure& measure,
                       std::span<const double> breaks, const QuadratureSpec& spec) {
    if (measure.degenerate()) {
        return 0.0;
    }
    std::vector<double> all = unit_breaks(0.0, measure.x_max());
    for (double b : breaks) {
        if (b > 0.0 && b < measure.x_max()) {
            all.push_back(b);
        }
    }
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    const auto integrand = [&h](double t) { return t > 0.0 ? h(t) * mp_density(t) : 0.0; };
    return integrate_piecewise(integrand, all, spec);
}

double factorial_moment2_oracle(const std::function<double(double, double)>& h,
                                const IntensityMeasure& measure, const QuadratureSpec& spec) {
    if (measure.degenerate()) {
        return 0.0;
    }
    const auto breaks = unit_breaks(0.0, measure.x_max());
    const auto outer = [&](double x) {
        if (!(x > 0.0)) {
            return 0.0;
        }
        const auto inner = [&](double y) { return y > 0.0 ? h(x, y) * mp_density(y) : 0.0; };
        return integrate_piecewise(inner, breaks, spec) * mp_density(x);
    };
    return integrate_piecewise(outer, breaks, spec);
}

LengthConfiguration parse_lengths(std::istream& in, const std::string& origin) {
    const ParsedValueFile parsed = parse_value_file(in, origin);
    IngestedSource source{origin, parsed.genus};
    for (std::size_t i = 0; i < parsed.values.size(); ++i) {
        const double v = parsed.values[i];
        if (!(v > 0.0)) {
            throw ParseError(origin + ":" + std::to_string(parsed.lines[i]) +
                                 ": lengths must be positive",
                             parsed.lines[i]);
        }
    }
    return LengthConfiguration::from_lengths(parsed.values, std::move(source));
}

LengthConfiguration read_length_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open length file '" + path + "'", 0);
    }
    return parse_lengths(in, path);
}

void write_length_file(std::ostream& out, const LengthConfiguration& cfg) {
    if (const auto* ingested = std::get_if<IngestedSource>(&cfg.source)) {
        if (ingested->genus) {
            out << "# genus=" << *ingested->genus << '\n';
        }
    } else if (const auto* sampled = std::get_if<SampledSource>(&cfg.source)) {
        out << "# source=sampled seed=" << sampled->root_seed
            << " stream=" << sampled->stream_index << " x_max=" << format_real(sampled->x_max)
            << '\n';
    }
    out << "# count=" << cfg.count() << '\n';
    for (double x : cfg.lengths) {
        out << format_real(x) << '\n';
    }
}

} // namespace hypvar
