#include "hypvar/errors.hpp"
#include "hypvar/point_process.hpp"
#include "hypvar/random.hpp"
#include "hypvar/spectral.hpp"
#include "hypvar/test_functions.hpp"
#include "hypvar/variance.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace hypvar;

namespace {

struct Stats {
    double mean;
    double var;
};

Stats stats(const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) {
        s += x;
    }
    const double mean = s / xs.size();
    double d = 0.0;
    for (double x : xs) {
        d += (x - mean) * (x - mean);
    }
    return {mean, d / (xs.size() - 1)};
}

} // namespace

TEST_CASE("intensity_mass: examples") {
    CHECK(std::abs(intensity_mass(1.0) - oracle::lambda1_series()) < 1e-12);
    for (double x : {1e-3, 1e-2, 0.1}) {
        CHECK(intensity_mass(x) == doctest::Approx(x * x / 4.0).epsilon(x * x));
        CHECK(intensity_mass(x) == doctest::Approx(oracle::lambda_series(x)).epsilon(1e-12));
    }
    const double L10 = intensity_mass(10.0);
    CHECK(std::abs(L10 / (std::exp(10.0) / 20.0) - 1.0) < 0.2);
    CHECK(intensity_mass(2.0) == doctest::Approx(oracle::lambda_series(2.0)).epsilon(1e-12));
}

TEST_CASE("intensity_mass is nondecreasing") {
    double prev = 0.0;
    for (double x = 0.25; x <= 20.0; x += 0.25) {
        const double v = intensity_mass(x);
        REQUIRE(v > prev);
        prev = v;
    }
}

TEST_CASE("IntensityMeasure: density and masses") {
    const IntensityMeasure m(6.0);
    CHECK(m.total_mass() == doctest::Approx(intensity_mass(6.0)).epsilon(1e-13));
    CHECK(m.mass(0.0, 2.0) + m.mass(2.0, 6.0) == doctest::Approx(m.total_mass()).epsilon(1e-13));
    CHECK(IntensityMeasure::density(1e-8) == doctest::Approx(0.5e-8));
    CHECK(IntensityMeasure::density(3.0) > 0.0);
    const IntensityMeasure empty(0.0);
    CHECK(empty.degenerate());
    CHECK(empty.total_mass() == 0.0);
}

TEST_CASE("sample: degenerate measure gives the empty configuration") {
    const IntensityMeasure empty(0.0);
    RngStream rng(1, 1);
    CHECK(sample(empty, rng).count() == 0);
}

TEST_CASE("sample: sorted, positive, bounded by x_max, reproducible") {
    const IntensityMeasure m(7.0);
    RngStream a(17, 3);
    RngStream b(17, 3);
    const auto ca = sample(m, a);
    const auto cb = sample(m, b);
    CHECK(ca.lengths == cb.lengths);
    REQUIRE(ca.count() > 0);
    CHECK(std::is_sorted(ca.lengths.begin(), ca.lengths.end()));
    CHECK(ca.lengths.front() > 0.0);
    CHECK(ca.lengths.back() <= 7.0);
    const auto& src = std::get<SampledSource>(ca.source);
    CHECK(src.root_seed == 17);
    CHECK(src.stream_index == 3);
    CHECK(src.x_max == 7.0);
}

TEST_CASE("sample: budget refusal carries the expected count") {
    const IntensityMeasure m(12.0);
    SamplerBudget budget;
    budget.max_expected_points = 100.0;
    RngStream rng(1, 0);
    try {
        (void)sample(m, rng, budget);
        FAIL("expected BudgetError");
    } catch (const BudgetError& e) {
        CHECK(e.expected_count() == doctest::Approx(m.total_mass()));
    }
    budget = {};
    budget.max_x_max = 10.0;
    CHECK_THROWS_AS(check_budget(m, budget), BudgetError);
}

TEST_CASE("sample: bin counts follow the Poisson law") {
    const IntensityMeasure m(6.0);
    const int R = 5000;
    const double edges[] = {0.0, 1.0, 2.0, 4.0, 6.0};
    std::vector<std::vector<double>> counts(4, std::vector<double>(R));
    std::vector<double> total(R);
    for (int r = 0; r < R; ++r) {
        RngStream rng(2024, r);
        const auto c = sample(m, rng);
        total[r] = static_cast<double>(c.count());
        for (double x : c.lengths) {
            for (int b = 0; b < 4; ++b) {
                if (x > edges[b] && x <= edges[b + 1]) {
                    counts[b][r] += 1.0;
                }
            }
        }
    }
    for (int b = 0; b < 4; ++b) {
        const double nu = m.mass(edges[b], edges[b + 1]);
        const Stats s = stats(counts[b]);
        CHECK(std::abs(s.mean - nu) <= 4.0 * std::sqrt(nu / R));
        CHECK(s.var / s.mean >= 0.9);
        CHECK(s.var / s.mean <= 1.1);
    }
    const Stats t = stats(total);
    CHECK(std::abs(t.mean - m.total_mass()) <= 4.0 * std::sqrt(m.total_mass() / R));
    // disjoint bins are uncorrelated
    const Stats s0 = stats(counts[1]);
    const Stats s1 = stats(counts[2]);
    double cov = 0.0;
    for (int r = 0; r < R; ++r) {
        cov += (counts[1][r] - s0.mean) * (counts[2][r] - s1.mean);
    }
    cov /= R - 1;
    CHECK(std::abs(cov) <= 4.0 * std::sqrt(m.mass(1.0, 2.0) * m.mass(2.0, 4.0) / R));
}

TEST_CASE("campbell_oracle: examples") {
    const IntensityMeasure m(5.0);
    CHECK(campbell_oracle([](double) { return 1.0; }, m) ==
          doctest::Approx(m.total_mass()).epsilon(1e-12));
    const double breaks[] = {0.0, 1.5, 3.0, 5.0};
    CHECK(campbell_oracle([](double x) { return x > 1.5 && x <= 3.0 ? 1.0 : 0.0; }, m, breaks) ==
          doctest::Approx(m.mass(1.5, 3.0)).epsilon(1e-12));
}

TEST_CASE("campbell_oracle matches Monte Carlo for several h") {
    const IntensityMeasure m(5.0);
    const TestFunction tf = make_polynomial_testfn(2, 1.0);
    const double L = 5.0;
    std::vector<std::function<double(double)>> hs = {
        [](double x) { return x; },
        [](double x) { return std::exp(-x); },
        [](double x) { return std::sin(3.0 * x); },
        [](double x) { return 1.0 / (1.0 + x * x); },
        [&](double x) { return 4.0 / (L * L) * kernel_HL(x, tf, L) * kernel_HL(x, tf, L) * 0.5; },
    };
    const int R = 4000;
    for (std::size_t i = 0; i < hs.size(); ++i) {
        std::vector<double> sums(R);
        for (int r = 0; r < R; ++r) {
            RngStream rng(77, r);
            for (double x : sample(m, rng).lengths) {
                sums[r] += hs[i](x);
            }
        }
        const Stats s = stats(sums);
        const double exact = campbell_oracle(hs[i], m);
        CHECK(std::abs(s.mean - exact) <= 4.0 * std::sqrt(s.var / R));
    }
}

TEST_CASE("factorial_moment2_oracle: examples and Monte Carlo") {
    const IntensityMeasure m(4.0);
    const double lam = m.total_mass();
    CHECK(factorial_moment2_oracle([](double, double) { return 1.0; }, m) ==
          doctest::Approx(lam * lam).epsilon(1e-10));
    const auto g = [](double x) { return std::exp(-x) * x; };
    const double G = campbell_oracle(g, m);
    CHECK(factorial_moment2_oracle([&](double x, double y) { return g(x) * g(y); }, m) ==
          doctest::Approx(G * G).epsilon(1e-10));

    const auto h = [](double x, double y) { return std::cos(x - y) + x * y * 0.1; };
    const double exact = factorial_moment2_oracle(h, m);
    const int R = 4000;
    std::vector<double> sums(R);
    for (int r = 0; r < R; ++r) {
        RngStream rng(78, r);
        const auto c = sample(m, rng);
        for (std::size_t i = 0; i < c.count(); ++i) {
            for (std::size_t j = 0; j < c.count(); ++j) {
                if (i != j) {
                    sums[r] += h(c.lengths[i], c.lengths[j]);
                }
            }
        }
    }
    const Stats s = stats(sums);
    CHECK(std::abs(s.mean - exact) <= 4.0 * std::sqrt(s.var / R));
}

TEST_CASE("enlarging x_max past C0 L leaves phi unchanged on coupled streams") {
    const TestFunction tf = make_polynomial_testfn(2, 1.0);
    const WeightFunction wf = make_weight(WeightFamily::bspline4);
    const double L = 5.0;
    const IntensityMeasure big(9.0);
    for (int r = 0; r < 20; ++r) {
        RngStream rng(5, r);
        const auto full = sample(big, rng);
        const auto cut = full.restricted_to(tf.support_radius() * L);
        const double T = 1e4;
        CHECK(phi(build_marks(full, tf, L), wf, T).total ==
              phi(build_marks(cut, tf, L), wf, T).total);
    }
}

TEST_CASE("length files: parse, normalize, reject") {
    std::istringstream in("# genus=3\n\n2.5\n0.5\n# comment\n1.0\n");
    const auto cfg = parse_lengths(in, "mem");
    CHECK(cfg.lengths == std::vector<double>{0.5, 1.0, 2.5});
    const auto& src = std::get<IngestedSource>(cfg.source);
    REQUIRE(src.genus.has_value());
    CHECK(*src.genus == 3);

    std::ostringstream out;
    write_length_file(out, cfg);
    std::istringstream back(out.str());
    CHECK(parse_lengths(back, "mem").lengths == cfg.lengths);

    std::istringstream bad("1.0\nabc\n");
    try {
        (void)parse_lengths(bad, "mem");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
    std::istringstream negative("1.0\n-2.0\n");
    CHECK_THROWS_AS(parse_lengths(negative, "mem"), ParseError);
    std::istringstream zero("0\n");
    CHECK_THROWS_AS(parse_lengths(zero, "mem"), ParseError);
    CHECK_THROWS_AS(LengthConfiguration::from_lengths({1.0, -1.0}), std::invalid_argument);
}
