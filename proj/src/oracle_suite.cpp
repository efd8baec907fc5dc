#include "hypvar/oracle_suite.hpp"

#include "hypvar/errors.hpp"
#include "hypvar/numerics.hpp"
#include "hypvar/random.hpp"
#include "hypvar/reference.hpp"
#include "hypvar/spectral.hpp"
#include "hypvar/text_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

namespace hypvar {

namespace {

struct Moments {
    double mean = 0.0;
    double std_err = 0.0;
    int n = 0;
};

Moments moments(const std::vector<double>& xs) {
    Moments m;
    m.n = static_cast<int>(xs.size());
    if (m.n == 0) {
        return m;
    }
    CompensatedSum s;
    for (double x : xs) {
        s += x;
    }
    m.mean = s.value() / m.n;
    if (m.n > 1) {
        CompensatedSum d;
        for (double x : xs) {
            d += (x - m.mean) * (x - m.mean);
        }
        m.std_err = std::sqrt(d.value() / (m.n - 1) / m.n);
    }
    return m;
}

std::vector<ResultRecord> run_row(const ExperimentConfig& base, const std::string& id, double L,
                                  double T, int replicates) {
    ExperimentConfig cfg = base;
    cfg.experiment_id = id;
    const RowContext ctx(cfg, L, T);
    if (ctx.refusal()) {
        throw BudgetError(*ctx.refusal(), ctx.expected_points());
    }
    std::vector<ResultRecord> records(static_cast<std::size_t>(replicates));
    parallel_for(records.size(), cfg.threads,
                 [&](std::size_t r) { records[r] = ctx.run_replicate(r); });
    for (const auto& rec : records) {
        if (rec.status != RecordStatus::ok) {
            throw std::runtime_error("replicate " + std::to_string(rec.replicate) + " of " + id +
                                     " did not complete: " + rec.message);
        }
    }
    return records;
}

template <class Body>
CheckResult timed(std::string id, std::string title, Body&& body) {
    CheckResult res;
    res.id = std::move(id);
    res.title = std::move(title);
    const auto start = std::chrono::steady_clock::now();
    try {
        body(res);
    } catch (const std::exception& e) {
        res.passed = false;
        if (!res.detail.empty()) {
            res.detail += "; ";
        }
        res.detail += std::string("error: ") + e.what();
    }
    res.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return res;
}

void note(CheckResult& res, const std::string& text) {
    if (!res.detail.empty()) {
        res.detail += "; ";
    }
    res.detail += text;
}

// Uniform draw in (lo, hi).
double uniform(RngStream& rng, double lo, double hi) {
    return lo + (hi - lo) * rng.uniform01();
}

} // namespace

bool OracleReport::all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

CheckResult check_goe_target(const ExperimentConfig& cfg, const OracleSuiteOptions& opts) {
    return timed("A1", "GOE target", [&](CheckResult& res) {
        const TestFunction tf = cfg.fhat.build();
        const double value = sigma2_goe(tf);
        // 4 int_0^C x (1 - x^2/C^2)^{2p} dx = 2 C^2 / (2p + 1)
        double exact = 0.0;
        if (tf.family() == TestFamily::polynomial) {
            const double c = tf.support_radius();
            exact = 2.0 * c * c / (2.0 * tf.power() + 1.0);
        }
        exact += opts.sigma2_offset;
        res.measured = {{"sigma2_goe", value}, {"closed_form", exact},
                        {"abs_err", std::abs(value - exact)}};
        res.passed = std::abs(value - exact) <= 1e-10;
    });
}

CheckResult check_diag11_identity(const ExperimentConfig& cfg, const OracleSuiteOptions& opts) {
    return timed("A2", "(1,1) mean identity", [&](CheckResult& res) {
        const TestFunction tf = cfg.fhat.build();
        const WeightFunction wf = cfg.weight();
        const double L = 8.0;
        const double T = 1e6;
        const double target = sigma2_goe(tf) + opts.sigma2_offset;
        const double oracle = diag11_mean_oracle(tf, wf, L, T);
        res.measured = {{"oracle", oracle}, {"target", target},
                        {"oracle_abs_err", std::abs(oracle - target)}};
        bool ok = std::abs(oracle - target) <= 1e-6;
        if (!ok) {
            note(res, "oracle differs from the GOE target by more than 1e-6");
        }
        if (opts.monte_carlo) {
            const auto records = run_row(cfg, "oracle-A2", L, T, opts.mc_replicates);
            std::vector<double> xs;
            xs.reserve(records.size());
            for (const auto& r : records) {
                xs.push_back(r.phi.diag11);
            }
            const Moments m = moments(xs);
            const double z = m.std_err > 0.0 ? (m.mean - oracle) / m.std_err : 0.0;
            res.measured.insert(res.measured.end(), {{"mc_mean", m.mean},
                                                     {"mc_std_err", m.std_err},
                                                     {"mc_R", static_cast<double>(m.n)},
                                                     {"z", z}});
            if (!(std::abs(m.mean - oracle) <= 4.0 * m.std_err)) {
                ok = false;
                note(res, "Monte Carlo mean is more than 4 standard errors from the oracle");
            }
        }
        res.passed = ok;
    });
}

CheckResult check_closed_form(const ExperimentConfig& cfg, const OracleSuiteOptions&) {
    return timed("A3", "closed form vs definition", [&](CheckResult& res) {
        const TestFunction tf = cfg.fhat.build();
        const WeightFunction wf = cfg.weight();
        bool ok = true;

        // (a) phi against direct energy quadrature on small configurations.
        const double T = 50.0;
        double worst = 0.0;
        for (std::uint64_t i = 0; i < 20; ++i) {
            RngStream rng(cfg.root_seed, stream_index_for("oracle-A3-direct", i));
            const double L = uniform(rng, 2.0, 4.0);
            const double support = tf.support_radius() * L;
            const int points = 1 + static_cast<int>(6.0 * rng.uniform01());
            LengthConfiguration config;
            MarkSet marks;
            do {
                std::vector<double> lengths;
                for (int j = 0; j < points; ++j) {
                    lengths.push_back(uniform(rng, 0.15, support));
                }
                config = LengthConfiguration::from_lengths(std::move(lengths));
                marks = build_marks(config, tf, L);
            } while (marks.size() > 30);
            const double closed = phi(marks, wf, T).total;
            const double direct = energy_variance_direct(config, tf, wf, L, T);
            const double rel = std::abs(closed - direct) / std::max(1.0, std::abs(closed));
            worst = std::max(worst, rel);
        }
        res.measured.emplace_back("direct_worst_rel", worst);
        if (!(worst <= 1e-3)) {
            ok = false;
            note(res, "phi and direct quadrature disagree beyond 1e-3");
        }

        // (b) window scan against brute-force pairing.
        const IntensityMeasure measure(8.0);
        std::vector<LengthConfiguration> configs;
        for (std::uint64_t i = 0; i < 3; ++i) {
            RngStream rng(cfg.root_seed, stream_index_for("oracle-A3-brute", i));
            configs.push_back(sample(measure, rng));
        }
        // near-coincident and exactly repeated marks
        configs.push_back(LengthConfiguration::from_lengths(
            {0.03, 0.03 + 1e-10, 0.06, 0.06 + 5e-13, 0.09, 1.0, 1.0, 1.0 + 2e-10, 2.0, 3.0 - 1e-9,
             3.0}));
        const double L = 8.0;
        double worst_abs = 0.0;
        std::size_t largest = 0;
        for (double Tb : {10.0, 1e3, 1e9}) {
            for (const auto& c : configs) {
                LengthConfiguration trimmed = c;
                MarkSet marks = build_marks(trimmed, tf, L);
                while (marks.size() > 500) {
                    trimmed.lengths.pop_back();
                    marks = build_marks(trimmed, tf, L);
                }
                largest = std::max(largest, marks.size());
                const auto fast = phi(marks, wf, Tb);
                const auto slow = reference::phi_brute_force(marks, wf, Tb);
                for (double d : {fast.total - slow.total, fast.diag11 - slow.diag11,
                                 fast.diag_tail - slow.diag_tail, fast.offdiag - slow.offdiag}) {
                    worst_abs = std::max(worst_abs, std::abs(d));
                }
            }
        }
        res.measured.emplace_back("brute_worst_abs", worst_abs);
        res.measured.emplace_back("brute_max_marks", static_cast<double>(largest));
        if (!(worst_abs <= 1e-12)) {
            ok = false;
            note(res, "window scan and brute force disagree beyond 1e-12");
        }
        res.passed = ok;
    });
}

CheckResult check_offdiag_decay(const ExperimentConfig& cfg, const OracleSuiteOptions& opts) {
    return timed("A4", "off-diagonal 1/T decay", [&](CheckResult& res) {
        const TestFunction tf = cfg.fhat.build();
        const WeightFunction wf = cfg.weight();
        const double L = 6.0;
        const double v3 = offdiag_abs_oracle(tf, wf, L, 1e3, cfg.k_max);
        const double v4 = offdiag_abs_oracle(tf, wf, L, 1e4, cfg.k_max);
        const double v5 = offdiag_abs_oracle(tf, wf, L, 1e5, cfg.k_max);
        const double r1 = v3 / v4;
        const double r2 = v4 / v5;
        res.measured = {{"oracle_T1e3", v3}, {"oracle_T1e4", v4}, {"oracle_T1e5", v5},
                        {"ratio_1", r1},     {"ratio_2", r2}};
        bool ok = v3 > v4 && v4 > v5 && r1 >= 8.0 && r1 <= 12.5 && r2 >= 8.0 && r2 <= 12.5;
        if (!ok) {
            note(res, "successive ratios outside [8, 12.5]");
        }
        if (opts.monte_carlo) {
            const auto records = run_row(cfg, "oracle-A4", L, 1e3, opts.mc_replicates);
            std::vector<double> xs;
            xs.reserve(records.size());
            for (const auto& r : records) {
                xs.push_back(std::abs(r.phi.offdiag));
            }
            const Moments m = moments(xs);
            const double allowance = 0.02 * v3;
            res.measured.insert(res.measured.end(), {{"mc_mean_abs", m.mean},
                                                     {"mc_std_err", m.std_err},
                                                     {"mc_R", static_cast<double>(m.n)},
                                                     {"tail_allowance", allowance}});
            if (!(std::abs(m.mean - v3) <= 4.0 * m.std_err + allowance)) {
                ok = false;
                note(res, "Monte Carlo mean |offdiag| outside 4 standard errors plus allowance");
            }
        }
        res.passed = ok;
    });
}

CheckResult check_k_tail(const ExperimentConfig& cfg, const OracleSuiteOptions&) {
    return timed("A5", "k-tail log L / L^2", [&](CheckResult& res) {
        const TestFunction tf = cfg.fhat.build();
        const WeightFunction wf = cfg.weight();
        std::vector<double> Ls{8.0, 16.0, 32.0, 64.0};
        std::vector<double> values;
        std::vector<double> scaled;
        for (double L : Ls) {
            const double v = d_term_sum(12, tf, wf, L, std::exp(3.0 * L));
            values.push_back(v);
            scaled.push_back(v * L * L / std::log(L));
            res.measured.emplace_back("sum_L" + format_real(L), v);
        }
        const auto [lo, hi] = std::minmax_element(scaled.begin(), scaled.end());
        const double c = std::sqrt(*lo * *hi);
        res.measured.emplace_back("fitted_c", c);
        res.measured.emplace_back("max_ratio", *hi / c);
        res.measured.emplace_back("min_ratio", *lo / c);
        bool decreasing = true;
        for (std::size_t i = 1; i < values.size(); ++i) {
            decreasing = decreasing && values[i] < values[i - 1];
        }
        const bool within = c > 0.0 && *hi / c <= 2.0 && *lo / c >= 0.5;
        if (!decreasing) {
            note(res, "sums are not decreasing in L");
        }
        if (!within) {
            note(res, "no single c fits within a factor 2");
        }
        res.passed = decreasing && within;
    });
}

OracleReport run_oracle_suite(const ExperimentConfig& cfg, const OracleSuiteOptions& opts) {
    OracleReport report;
    report.checks.push_back(check_goe_target(cfg, opts));
    report.checks.push_back(check_diag11_identity(cfg, opts));
    report.checks.push_back(check_closed_form(cfg, opts));
    report.checks.push_back(check_offdiag_decay(cfg, opts));
    report.checks.push_back(check_k_tail(cfg, opts));
    return report;
}

CheckResult check_convergence(const ExperimentConfig& base) {
    return timed("A6", "convergence schedule", [&](CheckResult& res) {
        ExperimentConfig cfg = base;
        cfg.experiment_id = "acceptance-A6";
        cfg.schedule = exponential_schedule({4.0, 6.0, 8.0, 10.0}, 3.0);
        cfg.replicates.reset();
        cfg.epsilon = 0.05;
        const ScheduleResult out = run_schedule(cfg);
        bool mean_decreasing = true;
        bool prob_nonincreasing = true;
        for (std::size_t i = 0; i < out.summary.size(); ++i) {
            const auto& row = out.summary[i];
            if (row.status != "ok") {
                throw std::runtime_error("row L=" + format_real(row.L) + " status " + row.status);
            }
            const std::string tag = "L" + format_real(row.L);
            res.measured.emplace_back("mean_abs_dev_" + tag, row.mean_abs_dev);
            res.measured.emplace_back("std_err_" + tag, row.std_err);
            res.measured.emplace_back("prob_" + tag, row.prob_dev_gt_eps);
            if (i > 0) {
                mean_decreasing =
                    mean_decreasing && row.mean_abs_dev < out.summary[i - 1].mean_abs_dev;
                prob_nonincreasing =
                    prob_nonincreasing && row.prob_dev_gt_eps <= out.summary[i - 1].prob_dev_gt_eps;
            }
        }
        const auto& last = out.summary.back();
        const bool small_mean = last.mean_abs_dev < 0.05;
        const bool small_prob = last.prob_dev_gt_eps <= 0.05;
        if (!mean_decreasing) {
            note(res, "mean_abs_dev not strictly decreasing");
        }
        if (!prob_nonincreasing) {
            note(res, "prob_dev_gt_eps increases somewhere");
        }
        if (!small_mean) {
            note(res, "mean_abs_dev at L=10 is not below 0.05");
        }
        if (!small_prob) {
            note(res, "prob_dev_gt_eps at L=10 exceeds 5%");
        }
        res.passed = mean_decreasing && prob_nonincreasing && small_mean && small_prob;
    });
}

CheckResult check_sampler_law(const ExperimentConfig& cfg) {
    return timed("A7", "sampler Poisson law", [&](CheckResult& res) {
        const IntensityMeasure measure(6.0);
        const int R = 5000;
        const double edges[] = {0.0, 2.0, 4.0, 6.0};
        constexpr int bins = 3;
        std::vector<std::array<double, bins + 1>> counts(R);
        parallel_for(R, cfg.threads, [&](std::size_t r) {
            RngStream rng(cfg.root_seed, stream_index_for("acceptance-A7", r));
            const LengthConfiguration c = sample(measure, rng);
            std::array<double, bins + 1> row{};
            for (double x : c.lengths) {
                for (int b = 0; b < bins; ++b) {
                    if (x > edges[b] && x <= edges[b + 1]) {
                        row[b] += 1.0;
                    }
                }
            }
            row[bins] = static_cast<double>(c.count());
            counts[r] = row;
        });
        bool ok = true;
        std::vector<double> means(bins + 1);
        for (int b = 0; b <= bins; ++b) {
            const double nu = b < bins ? measure.mass(edges[b], edges[b + 1]) : measure.total_mass();
            std::vector<double> xs(R);
            for (int r = 0; r < R; ++r) {
                xs[r] = counts[r][b];
            }
            const Moments m = moments(xs);
            means[b] = m.mean;
            const double var = m.std_err * m.std_err * R;
            const double ratio = var / m.mean;
            const double sigma = std::sqrt(nu / R);
            const std::string tag = b < bins ? "bin" + std::to_string(b) : "total";
            res.measured.emplace_back(tag + "_mean", m.mean);
            res.measured.emplace_back(tag + "_nu", nu);
            res.measured.emplace_back(tag + "_var_over_mean", ratio);
            if (!(std::abs(m.mean - nu) <= 4.0 * sigma)) {
                ok = false;
                note(res, tag + ": mean outside 4 sigma");
            }
            if (!(ratio >= 0.9 && ratio <= 1.1)) {
                ok = false;
                note(res, tag + ": variance/mean outside [0.9, 1.1]");
            }
        }
        // covariance of the counts on (0,2] and (2,4]
        CompensatedSum cov;
        for (int r = 0; r < R; ++r) {
            cov += (counts[r][0] - means[0]) * (counts[r][1] - means[1]);
        }
        const double c01 = cov.value() / (R - 1);
        const double sigma01 = std::sqrt(measure.mass(0.0, 2.0) * measure.mass(2.0, 4.0) / R);
        res.measured.emplace_back("cov_bin0_bin1", c01);
        res.measured.emplace_back("cov_sigma", sigma01);
        if (!(std::abs(c01) <= 4.0 * sigma01)) {
            ok = false;
            note(res, "disjoint-bin covariance outside 4 sigma");
        }
        res.passed = ok;
    });
}

void write_report_text(std::ostream& out, const std::vector<CheckResult>& checks) {
    for (const auto& c : checks) {
        out << c.id << ' ' << (c.passed ? "PASS" : "FAIL") << ' ' << c.title << ':';
        for (const auto& [name, value] : c.measured) {
            out << ' ' << name << '=' << format_real(value);
        }
        char secs[32];
        std::snprintf(secs, sizeof secs, "%.2f", c.seconds);
        out << " time=" << secs << 's';
        if (!c.detail.empty()) {
            out << " [" << c.detail << ']';
        }
        out << '\n';
    }
}

void write_report_json(std::ostream& out, const std::vector<CheckResult>& checks) {
    nlohmann::json doc = nlohmann::json::array();
    for (const auto& c : checks) {
        nlohmann::json measured = nlohmann::json::object();
        for (const auto& [name, value] : c.measured) {
            measured[name] = std::isfinite(value) ? nlohmann::json(value) : nlohmann::json(nullptr);
        }
        doc.push_back({{"id", c.id},
                       {"title", c.title},
                       {"passed", c.passed},
                       {"measured", measured},
                       {"detail", c.detail},
                       {"seconds", c.seconds}});
    }
    out << doc.dump(2) << '\n';
}

} // namespace hypvar
