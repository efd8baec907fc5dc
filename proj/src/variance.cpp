#include "hypvar/variance.hpp"

#include "hypvar/errors.hpp"
#include "hypvar/numerics.hpp"
#include "hypvar/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace hypvar {

namespace {

std::size_t marks_for_length(double l, double support) {
    if (!(l > 0.0) || l >= support) {
        return 0;
    }
    auto k = static_cast<std::size_t>(std::ceil(support / l)) - 1;
    while (k > 0 && static_cast<double>(k) * l >= support) {
        --k;
    }
    while (static_cast<double>(k + 1) * l < support) {
        ++k;
    }
    return k;
}

// w_k(x) * density(x) = (4/L) fhat(kx/L) sinh(x/2) sinh(x/2)/sinh(kx/2)
double weighted_density(double x, int k, const TestFunction& tf, double L) {
    if (!(x > 0.0)) {
        return 0.0;
    }
    const double v = tf.fhat(k * x / L);
    if (v == 0.0) {
        return 0.0;
    }
    return 4.0 / L * v * std::sinh(0.5 * x) * sinh_ratio(x, k);
}

void push_if_inside(std::vector<double>& breaks, double x, double lo, double hi) {
    if (x > lo && x < hi) {
        breaks.push_back(x);
    }
}

std::vector<double> finish_breaks(std::vector<double> breaks) {
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    return breaks;
}

void check_positive(double L, double T, const char* who) {
    if (!(L > 0.0) || !(T > 0.0)) {
        throw std::invalid_argument(std::string(who) + ": need L > 0 and T > 0");
    }
}

} // namespace

std::size_t count_marks(const LengthConfiguration& cfg, const TestFunction& tf, double L) {
    const double support = tf.support_radius() * L;
    std::size_t n = 0;
    for (double l : cfg.lengths) {
        if (l >= support) {
            break;
        }
        n += marks_for_length(l, support);
    }
    return n;
}

MarkSet build_marks(const LengthConfiguration& cfg, const TestFunction& tf, double L,
                    std::size_t max_marks) {
    if (!(L > 0.0)) {
        throw std::invalid_argument("build_marks: L must be > 0");
    }
    MarkSet set;
    set.L = L;
    set.support = tf.support_radius() * L;
    set.point_count = cfg.count();

    const std::size_t n = count_marks(cfg, tf, L);
    if (n > max_marks) {
        std::ostringstream msg;
        msg << "build_marks: " << n << " marks exceed the budget of " << max_marks;
        throw BudgetError(msg.str(), static_cast<double>(n));
    }
    if (cfg.count() > std::numeric_limits<std::uint32_t>::max()) {
        throw BudgetError("build_marks: too many points", static_cast<double>(cfg.count()));
    }
    set.marks.reserve(n);
    for (std::size_t i = 0; i < cfg.lengths.size(); ++i) {
        const double l = cfg.lengths[i];
        const std::size_t kmax = marks_for_length(l, set.support);
        for (std::size_t k = 1; k <= kmax; ++k) {
            const double m = static_cast<double>(k) * l;
            const double w = 2.0 / L * kernel_HL(m, tf, L) / static_cast<double>(k);
            set.marks.push_back(Mark{m, static_cast<std::uint32_t>(k),
                                     static_cast<std::uint32_t>(i), w});
        }
    }
    std::sort(set.marks.begin(), set.marks.end(), [](const Mark& a, const Mark& b) {
        if (a.m != b.m) {
            return a.m < b.m;
        }
        if (a.point_id != b.point_id) {
            return a.point_id < b.point_id;
        }
        return a.k < b.k;
    });
    return set;
}

VarianceDecomposition phi(const MarkSet& set, const WeightFunction& wf, double T) {
    if (!(T > 0.0)) {
        throw std::invalid_argument("phi: T must be > 0");
    }
    VarianceDecomposition out;
    const auto& marks = set.marks;
    const std::size_t n = marks.size();
    if (n == 0) {
        return out;
    }
    const double window = 1.0 / T;

    CompensatedSum total;
    CompensatedSum diag11;
    CompensatedSum diag_tail;
    CompensatedSum offdiag;
    std::uint64_t pairs = 0;

    // multiplicity 1 for a == b, 2 for the two orderings of a != b
    const auto accumulate = [&](const Mark& a, const Mark& b, double multiplicity) {
        const double term = multiplicity * a.weight * b.weight * kernel_UT(a.m, b.m, wf, T);
        ++pairs;
        total += term;
        if (a.point_id != b.point_id) {
            offdiag += term;
        } else if (a.k == 1 && b.k == 1) {
            diag11 += term;
        } else {
            diag_tail += term;
        }
    };

    const std::size_t prefix = static_cast<std::size_t>(
        std::upper_bound(marks.begin(), marks.end(), window,
                         [](double v, const Mark& mk) { return v < mk.m; }) -
        marks.begin());

    for (std::size_t a = 0; a < prefix; ++a) {
        accumulate(marks[a], marks[a], 1.0);
        for (std::size_t b = a + 1; b < prefix; ++b) {
            accumulate(marks[a], marks[b], 2.0);
        }
    }
    for (std::size_t a = 0; a < n; ++a) {
        if (a >= prefix) {
            accumulate(marks[a], marks[a], 1.0);
        }
        const double reach = marks[a].m + window;
        for (std::size_t b = std::max(a + 1, prefix); b < n && marks[b].m <= reach; ++b) {
            accumulate(marks[a], marks[b], 2.0);
        }
    }

    out.total = total.value();
    out.diag11 = diag11.value();
    out.diag_tail = diag_tail.value();
    out.offdiag = offdiag.value();
    out.pairs_evaluated = pairs;
    return out;
}

double offdiag_abs_term(int k1, int k2, const TestFunction& tf, const WeightFunction& wf, double L,
                        double T, const OracleOptions& opts) {
    if (k1 < 1 || k2 < 1) {
        throw std::invalid_argument("offdiag_abs_term: k1, k2 must be >= 1");
    }
    check_positive(L, T, "offdiag_abs_term");
    const double support = tf.support_radius() * L;
    const double x_end = support / k1;
    const double y_end = support / k2;
    const double a = 1.0 / T;
    const auto knots = wf.knots();

    // Region A: k1 x > 1/T. Only omegahat(T(k1 x - k2 y)) survives, and
    // y = (k1 x + u/T)/k2 with u in [-1, 1].
    const auto inner_window = [&](double x) {
        const double center = k1 * x;
        const double u_edge = (support - center) * T; // y reaches y_end
        if (u_edge <= -1.0) {
            return 0.0;
        }
        std::vector<double> ub{-1.0, 1.0};
        for (double kn : knots) {
            push_if_inside(ub, kn, -1.0, 1.0);
            push_if_inside(ub, -kn, -1.0, 1.0);
        }
        const double u_hi = std::min(1.0, u_edge);
        std::vector<double> breaks;
        for (double u : finish_breaks(ub)) {
            if (u < u_hi) {
                breaks.push_back(u);
            }
        }
        breaks.push_back(u_hi);
        breaks = finish_breaks(breaks);
        if (breaks.size() < 2) {
            return 0.0;
        }
        const auto g = [&](double u) {
            const double y = (center + u * a) / k2;
            return std::abs(weighted_density(y, k2, tf, L)) * 0.5 * std::abs(wf.omegahat(u));
        };
        return integrate_piecewise(g, breaks, opts.quad) * a / k2;
    };
    const auto outer_window = [&](double x) {
        return std::abs(weighted_density(x, k1, tf, L)) * inner_window(x);
    };

    double region_a = 0.0;
    const double x_start = a / k1;
    if (x_start < x_end) {
        std::vector<double> xb{x_start, x_end};
        push_if_inside(xb, (support - a) / k1, x_start, x_end);
        region_a = integrate_piecewise(outer_window, finish_breaks(xb), opts.quad);
    }

    // Region B: k1 x <= 1/T; all three terms of U_T can be nonzero.
    const auto inner_full = [&](double x) {
        const double y_hi = std::min(y_end, (k1 * x + a) / k2);
        if (!(y_hi > 0.0)) {
            return 0.0;
        }
        std::vector<double> yb{0.0, y_hi};
        for (double kn : knots) {
            for (double s : {kn, -kn}) {
                push_if_inside(yb, (k1 * x - s * a) / k2, 0.0, y_hi);
                push_if_inside(yb, (s * a - k1 * x) / k2, 0.0, y_hi);
                push_if_inside(yb, s * a / k2, 0.0, y_hi);
            }
        }
        const auto g = [&](double y) {
            return std::abs(weighted_density(y, k2, tf, L)) *
                   std::abs(kernel_UT(k1 * x, k2 * y, wf, T));
        };
        return integrate_piecewise(g, finish_breaks(yb), opts.quad);
    };
    const auto outer_full = [&](double x) {
        return std::abs(weighted_density(x, k1, tf, L)) * inner_full(x);
    };
    double region_b = 0.0;
    const double xb_end = std::min(x_start, x_end);
    if (xb_end > 0.0) {
        std::vector<double> xb{0.0, xb_end};
        for (double kn : knots) {
            push_if_inside(xb, kn * a / k1, 0.0, xb_end);
        }
        region_b = integrate_piecewise(outer_full, finish_breaks(xb), opts.quad);
    }
    return region_a + region_b;
}

double offdiag_abs_oracle(const TestFunction& tf, const WeightFunction& wf, double L, double T,
                          int k_max, const OracleOptions& opts) {
    if (k_max < 1) {
        throw std::invalid_argument("offdiag_abs_oracle: k_max must be >= 1");
    }
    CompensatedSum sum;
    for (int k1 = 1; k1 <= k_max; ++k1) {
        for (int k2 = 1; k2 <= k_max; ++k2) {
            sum += offdiag_abs_term(k1, k2, tf, wf, L, T, opts);
        }
    }
    return sum.value();
}

double d_term(int k1, int k2, const TestFunction& tf, const WeightFunction& wf, double L, double T,
              const OracleOptions& opts) {
    if (k1 < 1 || k2 < 1) {
        throw std::invalid_argument("d_term: k1, k2 must be >= 1");
    }
    check_positive(L, T, "d_term");
    const double x_end = tf.support_radius() * L / std::max(k1, k2);
    // (4/L^2) |H_L(k1 x) H_L(k2 x)|/(k1 k2) * density(x)
    //   = (8/L^2) x fhat(k1 x/L) fhat(k2 x/L) sr(x, k1) sr(x, k2)
    const auto integrand = [&](double x) {
        if (!(x > 0.0)) {
            return 0.0;
        }
        const double h = x * std::abs(tf.fhat(k1 * x / L) * tf.fhat(k2 * x / L)) *
                         sinh_ratio(x, k1) * sinh_ratio(x, k2);
        return 8.0 / (L * L) * h * std::abs(kernel_UT(k1 * x, k2 * x, wf, T));
    };
    std::vector<double> breaks{0.0, x_end};
    const double rates[] = {T * std::abs(k1 - k2), T * (k1 + k2), T * k1, T * k2};
    for (double rate : rates) {
        if (rate <= 0.0) {
            continue;
        }
        for (double kn : wf.knots()) {
            if (kn > 0.0) {
                push_if_inside(breaks, kn / rate, 0.0, x_end);
            }
        }
    }
    return integrate_piecewise(integrand, finish_breaks(breaks), opts.quad);
}

double d_term_sum(int max_sum, const TestFunction& tf, const WeightFunction& wf, double L,
                  double T, const OracleOptions& opts) {
    CompensatedSum sum;
    for (int k1 = 1; k1 < max_sum; ++k1) {
        for (int k2 = 1; k1 + k2 <= max_sum; ++k2) {
            if (k1 + k2 >= 3) {
                sum += d_term(k1, k2, tf, wf, L, T, opts);
            }
        }
    }
    return sum.value();
}

double diag11_mean_correction(const TestFunction& tf, const WeightFunction& wf, double L, double T,
                              const OracleOptions& opts) {
    check_positive(L, T, "diag11_mean_correction");
    const double TL = T * L;
    const double y_end = std::min(tf.support_radius(), 1.0 / TL);
    const auto integrand = [&](double y) {
        const double v = tf.fhat(y);
        const double w1 = wf.omegahat(TL * y);
        return v * v * y * (wf.omegahat(2.0 * TL * y) - 2.0 * w1 * w1);
    };
    std::vector<double> breaks{0.0, y_end};
    for (double kn : wf.knots()) {
        push_if_inside(breaks, kn / TL, 0.0, y_end);
        push_if_inside(breaks, kn / (2.0 * TL), 0.0, y_end);
    }
    return 4.0 * integrate_piecewise(integrand, finish_breaks(breaks), opts.quad);
}

double diag11_mean_oracle(const TestFunction& tf, const WeightFunction& wf, double L, double T,
                          const OracleOptions& opts) {
    return sigma2_goe(tf, opts.quad) + diag11_mean_correction(tf, wf, L, T, opts);
}

std::pair<double, double> diag11_secondmoment_oracles(const TestFunction& tf,
                                                      const WeightFunction& wf, double L, double T,
                                                      const OracleOptions& opts) {
    check_positive(L, T, "diag11_secondmoment_oracles");
    const double x_end = tf.support_radius() * L;
    // H_L^4 density = 2 x (x/sinh(x/2))^2 fhat(x/L)^4
    const auto integrand = [&](double x) {
        if (!(x > 0.0)) {
            return 0.0;
        }
        const double q = x_over_sinh_half(x);
        const double v = tf.fhat(x / L);
        const double u = kernel_UT(x, x, wf, T);
        return 2.0 * x * q * q * v * v * v * v * u * u;
    };
    std::vector<double> breaks{0.0, x_end};
    for (double kn : wf.knots()) {
        push_if_inside(breaks, kn / T, 0.0, x_end);
        push_if_inside(breaks, kn / (2.0 * T), 0.0, x_end);
    }
    const double fourth = 16.0 / (L * L * L * L) *
                          integrate_piecewise(integrand, finish_breaks(breaks), opts.quad);
    const double mean = diag11_mean_oracle(tf, wf, L, T, opts);
    return {fourth, mean * mean};
}

} // namespace hypvar
