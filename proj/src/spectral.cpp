#include "hypvar/spectral.hpp"

#include "hypvar/errors.hpp"
#include "hypvar/numerics.hpp"
#include "hypvar/text_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace hypvar {

namespace {

// Visits every node of the composite rule with its combined weight
// w_i * omega(tau_i / T) / T.
template <class Visitor>
void energy_sweep(Visitor&& visit, const WeightFunction& wf, double T, double nu_max,
                  const EnergyQuadratureSpec& spec) {
    if (!(T > 0.0)) {
        throw std::invalid_argument("energy average: T must be > 0");
    }
    if (!(spec.tail_tol > 0.0) || spec.panels_per_period < 1) {
        throw std::invalid_argument("energy average: invalid quadrature spec");
    }
    const double K = wf.cutoff_for_tail(spec.tail_tol);
    if (K > spec.max_cutoff) {
        std::ostringstream msg;
        msg << "energy average: the " << to_string(wf.family()) << " weight needs |tau| <= "
            << K << " T to keep the discarded tail below " << spec.tail_tol
            << " (limit " << spec.max_cutoff << " T); use the bspline4 weight, whose tail decays like s^-3";
        throw TailBoundError(msg.str());
    }
    const double half_range = K * T;
    double width = T / 8.0;
    if (nu_max > 0.0) {
        width = std::min(width, 2.0 * std::numbers::pi / nu_max / spec.panels_per_period);
    }
    const double panels = std::ceil(2.0 * half_range / width);
    if (panels > spec.max_panels) {
        throw BudgetError("energy average: panel count exceeds max_panels", panels);
    }
    const auto n = static_cast<std::int64_t>(panels);
    const double h = 2.0 * half_range / static_cast<double>(n);
    const double half_h = 0.5 * h;
    for (std::int64_t i = 0; i < n; ++i) {
        const double center = -half_range + (static_cast<double>(i) + 0.5) * h;
        for (int j = 0; j < GaussLegendre8::size; ++j) {
            const double tau = center + half_h * GaussLegendre8::nodes[j];
            const double w = half_h * GaussLegendre8::weights[j] * wf.omega(tau / T) / T;
            visit(tau, w);
        }
    }
}

std::size_t admissible_k(double x, double support) {
    // number of k >= 1 with k x < support
    if (!(x > 0.0) || x >= support) {
        return 0;
    }
    auto k = static_cast<std::size_t>(std::ceil(support / x)) - 1;
    while (k > 0 && static_cast<double>(k) * x >= support) {
        --k;
    }
    while (static_cast<double>(k + 1) * x < support) {
        ++k;
    }
    return k;
}

} // namespace

void WindowParams::validate() const {
    if (!(L > 0.0) || !(T > 0.0) || !(tau >= 0.0)) {
        throw std::invalid_argument("WindowParams: need L > 0, T > 0, tau >= 0");
    }
}

bool WindowParams::is_admissible(double c) const {
    return L <= c * std::log(T);
}

EigenvalueList EigenvalueList::from_values(std::vector<double> r_values, int genus) {
    if (genus < 2) {
        throw std::invalid_argument("EigenvalueList: genus must be >= 2");
    }
    for (double r : r_values) {
        if (!(r >= 0.0) || !std::isfinite(r)) {
            throw std::invalid_argument("EigenvalueList: r values must be finite and >= 0");
        }
    }
    std::sort(r_values.begin(), r_values.end());
    return EigenvalueList{std::move(r_values), genus};
}

EigenvalueList parse_eigenvalues(std::istream& in, const std::string& origin) {
    const ParsedValueFile parsed = parse_value_file(in, origin);
    if (!parsed.genus) {
        throw ParseError(origin + ": eigenvalue files need a '# genus=G' header", 0);
    }
    if (*parsed.genus < 2) {
        throw ParseError(origin + ": genus must be >= 2", 0);
    }
    for (std::size_t i = 0; i < parsed.values.size(); ++i) {
        if (!(parsed.values[i] >= 0.0)) {
            throw ParseError(origin + ":" + std::to_string(parsed.lines[i]) +
                                 ": spectral parameters must be >= 0",
                             parsed.lines[i]);
        }
    }
    return EigenvalueList::from_values(parsed.values, *parsed.genus);
}

EigenvalueList read_eigenvalue_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open eigenvalue file '" + path + "'", 0);
    }
    return parse_eigenvalues(in, path);
}

double kernel_HL(double x, const TestFunction& tf, double L) {
    if (!(x >= 0.0)) {
        throw std::invalid_argument("kernel_HL: x must be >= 0");
    }
    if (x >= tf.support_radius() * L) {
        return 0.0;
    }
    return x_over_sinh_half(x) * tf.fhat(x / L);
}

double kernel_H_L_tau(double x, const TestFunction& tf, double L, double tau) {
    if (!(x > 0.0)) {
        throw std::invalid_argument("kernel_H_L_tau: x must be > 0");
    }
    const std::size_t kmax = admissible_k(x, tf.support_radius() * L);
    CompensatedSum sum;
    for (std::size_t k = 1; k <= kmax; ++k) {
        const double kx = static_cast<double>(k) * x;
        sum += kernel_HL(kx, tf, L) * std::cos(kx * tau) / static_cast<double>(k);
    }
    return 2.0 / L * sum.value();
}

double kernel_UT(double x, double y, const WeightFunction& wf, double T) {
    return 0.5 * wf.omegahat(T * (x - y)) + 0.5 * wf.omegahat(T * (x + y)) -
           wf.omegahat(T * x) * wf.omegahat(T * y);
}

double oscillating_statistic(const LengthConfiguration& cfg, const TestFunction& tf, double L,
                             double tau) {
    const double support = tf.support_radius() * L;
    CompensatedSum sum;
    for (double l : cfg.lengths) {
        if (l >= support) {
            break;
        }
        sum += kernel_H_L_tau(l, tf, L, tau);
    }
    return sum.value();
}

OscillatingStatistic::OscillatingStatistic(const LengthConfiguration& cfg, const TestFunction& tf,
                                           double L) {
    const double support = tf.support_radius() * L;
    for (double l : cfg.lengths) {
        const std::size_t kmax = admissible_k(l, support);
        for (std::size_t k = 1; k <= kmax; ++k) {
            const double kl = static_cast<double>(k) * l;
            frequencies_.push_back(kl);
            coefficients_.push_back(2.0 / L * kernel_HL(kl, tf, L) / static_cast<double>(k));
            max_frequency_ = std::max(max_frequency_, kl);
        }
    }
}

double OscillatingStatistic::operator()(double tau) const {
    CompensatedSum sum;
    for (std::size_t i = 0; i < frequencies_.size(); ++i) {
        sum += coefficients_[i] * std::cos(frequencies_[i] * tau);
    }
    return sum.value();
}

double smooth_term(int genus, const TestFunction& tf, double L, double tau,
                   const QuadratureSpec& spec) {
    if (genus < 2) {
        throw std::invalid_argument("smooth_term: genus must be >= 2");
    }
    if (!(L > 0.0)) {
        throw std::invalid_argument("smooth_term: L must be > 0");
    }
    if (tf.family() == TestFamily::zero) {
        return 0.0;
    }
    const double R = tf.effective_support();
    const auto integrand = [&](double u) {
        const double r = tau + u / L;
        return tf.f(u) * r * std::tanh(std::numbers::pi * r);
    };
    // A few periods of f per panel, plus the kink of |r| at r = 0.
    const double step = 8.0 * std::numbers::pi / tf.support_radius();
    std::vector<double> breaks;
    for (double u = -R; u < R; u += step) {
        breaks.push_back(u);
    }
    breaks.push_back(R);
    const double kink = -tau * L;
    if (kink > -R && kink < R) {
        breaks.push_back(kink);
        std::sort(breaks.begin(), breaks.end());
    }
    const double integral = integrate_piecewise(integrand, breaks, spec);
    return 2.0 * (genus - 1) / L * integral;
}

double spectral_count(const EigenvalueList& ev, const TestFunction& tf, double L, double tau) {
    if (!(L > 0.0)) {
        throw std::invalid_argument("spectral_count: L must be > 0");
    }
    const double reach = tf.effective_support() / L;
    const auto& r = ev.r_values;
    CompensatedSum sum;
    // f(L(r - tau)) for r in [tau - reach, tau + reach]
    auto lo = std::lower_bound(r.begin(), r.end(), tau - reach);
    auto hi = std::upper_bound(r.begin(), r.end(), tau + reach);
    for (auto it = lo; it != hi; ++it) {
        sum += tf.f(L * (*it - tau));
    }
    // f(L(r + tau)) for r in [0, reach - tau]
    hi = std::upper_bound(r.begin(), r.end(), reach - tau);
    for (auto it = r.begin(); it < hi; ++it) {
        sum += tf.f(L * (*it + tau));
    }
    return sum.value();
}

double energy_average(const std::function<double(double)>& F, const WeightFunction& wf, double T,
                      double nu_max, const EnergyQuadratureSpec& spec) {
    CompensatedSum sum;
    energy_sweep([&](double tau, double w) { sum += w * F(tau); }, wf, T, nu_max, spec);
    return sum.value();
}

double energy_variance_direct(const LengthConfiguration& cfg, const TestFunction& tf,
                              const WeightFunction& wf, double L, double T,
                              const EnergyQuadratureSpec& spec,
                              const DirectVarianceLimits& limits) {
    if (!(L > 0.0) || !(T > 0.0)) {
        throw std::invalid_argument("energy_variance_direct: need L > 0 and T > 0");
    }
    if (T > limits.max_T) {
        throw BudgetError("energy_variance_direct: T above the direct-quadrature limit", T);
    }
    const OscillatingStatistic S(cfg, tf, L);
    if (S.term_count() > limits.max_marks) {
        throw BudgetError("energy_variance_direct: too many (l, k) terms",
                          static_cast<double>(S.term_count()));
    }
    if (S.term_count() == 0) {
        return 0.0;
    }
    CompensatedSum mass;
    CompensatedSum first;
    CompensatedSum second;
    energy_sweep(
        [&](double tau, double w) {
            const double s = S(tau);
            mass += w;
            first += w * s;
            second += w * s * s;
        },
        wf, T, 2.0 * S.max_frequency(), spec);
    const double m = mass.value();
    const double mean = first.value() / m;
    return second.value() / m - mean * mean;
}

} // namespace hypvar
