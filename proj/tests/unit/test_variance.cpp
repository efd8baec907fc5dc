#include "hypvar/errors.hpp"
#include "hypvar/point_process.hpp"
#include "hypvar/random.hpp"
#include "hypvar/reference.hpp"
#include "hypvar/spectral.hpp"
#include "hypvar/variance.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace hypvar;

namespace {

const TestFunction& poly2() {
    static const TestFunction tf = make_polynomial_testfn(2, 1.0);
    return tf;
}

const WeightFunction& bspline() {
    static const WeightFunction wf = make_weight(WeightFamily::bspline4);
    return wf;
}

void check_close(const VarianceDecomposition& a, const VarianceDecomposition& b, double tol) {
    CHECK(std::abs(a.total - b.total) <= tol);
    CHECK(std::abs(a.diag11 - b.diag11) <= tol);
    CHECK(std::abs(a.diag_tail - b.diag_tail) <= tol);
    CHECK(std::abs(a.offdiag - b.offdiag) <= tol);
}

struct MeanSe {
    double mean;
    double se;
};

MeanSe mean_se(const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) {
        s += x;
    }
    const double m = s / xs.size();
    double d = 0.0;
    for (double x : xs) {
        d += (x - m) * (x - m);
    }
    return {m, std::sqrt(d / (xs.size() - 1) / xs.size())};
}

} // namespace

TEST_CASE("build_marks: examples") {
    CHECK(build_marks(LengthConfiguration{}, poly2(), 5.0).empty());

    const double L = 6.0;
    const auto one = build_marks(LengthConfiguration::from_lengths({L / 2 + 1e-9}), poly2(), L);
    REQUIRE(one.size() == 1);
    CHECK(one.marks[0].k == 1);

    const auto nine = build_marks(LengthConfiguration::from_lengths({1.0}), poly2(), 10.0);
    REQUIRE(nine.size() == 9);
    for (std::uint32_t k = 1; k <= 9; ++k) {
        CHECK(nine.marks[k - 1].k == k);
        CHECK(nine.marks[k - 1].m == static_cast<double>(k));
        CHECK(nine.marks[k - 1].weight ==
              doctest::Approx(2.0 / 10.0 * kernel_HL(k, poly2(), 10.0) / k).epsilon(1e-15));
    }
    CHECK(count_marks(LengthConfiguration::from_lengths({1.0}), poly2(), 10.0) == 9);
}

TEST_CASE("build_marks: sorted with deterministic tie order") {
    const auto cfg = LengthConfiguration::from_lengths({0.5, 1.0, 1.0, 1.5});
    const auto marks = build_marks(cfg, poly2(), 4.0);
    CHECK(marks.size() == count_marks(cfg, poly2(), 4.0));
    for (std::size_t i = 1; i < marks.size(); ++i) {
        const Mark& a = marks.marks[i - 1];
        const Mark& b = marks.marks[i];
        REQUIRE((a.m < b.m || (a.m == b.m && (a.point_id < b.point_id ||
                                                (a.point_id == b.point_id && a.k < b.k)))));
        REQUIRE(b.m < 4.0);
        REQUIRE(std::isfinite(b.weight));
    }
    // every admissible (point, k) pair present once
    std::size_t expected = 0;
    for (double l : cfg.lengths) {
        for (int k = 1; k * l < 4.0; ++k) {
            ++expected;
        }
    }
    CHECK(marks.size() == expected);
}

TEST_CASE("build_marks: budget refusal") {
    std::vector<double> lengths(100, 0.001);
    const auto cfg = LengthConfiguration::from_lengths(lengths);
    try {
        (void)build_marks(cfg, poly2(), 10.0, 1000);
        FAIL("expected BudgetError");
    } catch (const BudgetError& e) {
        CHECK(e.expected_count() == doctest::Approx(100.0 * 9999.0));
    }
}

TEST_CASE("phi: examples") {
    const auto empty = phi(MarkSet{}, bspline(), 10.0);
    CHECK(empty.total == 0.0);
    CHECK(empty.diag11 == 0.0);
    CHECK(empty.offdiag == 0.0);
    CHECK(empty.pairs_evaluated == 0);

    const double L = 6.0;
    const auto single = build_marks(LengthConfiguration::from_lengths({4.0}), poly2(), L);
    REQUIRE(single.size() == 1);
    const double w = single.marks[0].weight;
    const auto d = phi(single, bspline(), 10.0);
    CHECK(d.total == doctest::Approx(0.5 * w * w).epsilon(1e-15));
    CHECK(d.diag11 == d.total);
    CHECK(d.offdiag == 0.0);
    CHECK(d.diag_tail == 0.0);
}

TEST_CASE("phi: far-apart points add up and match direct quadrature") {
    const double L = 4.0;
    const double T = 50.0;
    const auto a = LengthConfiguration::from_lengths({2.2});
    const auto b = LengthConfiguration::from_lengths({3.1});
    const auto ab = LengthConfiguration::from_lengths({2.2, 3.1});
    const auto da = phi(build_marks(a, poly2(), L), bspline(), T);
    const auto db = phi(build_marks(b, poly2(), L), bspline(), T);
    const auto dab = phi(build_marks(ab, poly2(), L), bspline(), T);
    CHECK(dab.total == doctest::Approx(da.total + db.total).epsilon(1e-15));
    CHECK(dab.offdiag == 0.0);
    const double direct = energy_variance_direct(ab, poly2(), bspline(), L, T);
    CHECK(std::abs(direct - dab.total) <= 1e-3 * std::max(1.0, dab.total));
}

TEST_CASE("phi matches direct energy quadrature on random small configurations") {
    RngStream rng(404, 0);
    int done = 0;
    while (done < 20) {
        const double L = 1.5 + 2.5 * rng.uniform01();
        const int n = 1 + static_cast<int>(7 * rng.uniform01());
        std::vector<double> lengths;
        for (int i = 0; i < n; ++i) {
            lengths.push_back(0.1 + (L - 0.1) * rng.uniform01());
        }
        // close pairs so that off-diagonal terms appear
        if (n > 1 && rng.uniform01() < 0.5) {
            lengths[1] = lengths[0] + 0.01 * rng.uniform01();
        }
        const auto cfg = LengthConfiguration::from_lengths(lengths);
        const auto marks = build_marks(cfg, poly2(), L);
        if (marks.size() > 30) {
            continue;
        }
        const double closed = phi(marks, bspline(), 50.0).total;
        const double direct = energy_variance_direct(cfg, poly2(), bspline(), L, 50.0);
        REQUIRE(std::abs(closed - direct) <= 1e-3 * std::max(1.0, std::abs(closed)));
        ++done;
    }
}

TEST_CASE("phi: window scan equals brute force") {
    const IntensityMeasure m(8.0);
    for (double T : {10.0, 1e3, 1e9}) {
        for (int r = 0; r < 4; ++r) {
            RngStream rng(99, r);
            auto cfg = sample(m, rng);
            auto marks = build_marks(cfg, poly2(), 8.0);
            while (marks.size() > 500) {
                cfg.lengths.pop_back();
                marks = build_marks(cfg, poly2(), 8.0);
            }
            const auto fast = phi(marks, bspline(), T);
            const auto slow = reference::phi_brute_force(marks, bspline(), T);
            check_close(fast, slow, 1e-12);
            CHECK(fast.pairs_evaluated <= marks.size() * marks.size());
        }
    }
}

TEST_CASE("phi: brute force on clustered marks and tiny prefixes") {
    // many marks below 1/T and coincident marks from commensurate lengths
    const auto cfg = LengthConfiguration::from_lengths(
        {0.001, 0.0015, 0.002, 0.002, 0.003 + 1e-12, 0.05, 0.1, 0.1 + 1e-11, 0.3, 0.6, 1.2});
    const auto marks = build_marks(cfg, poly2(), 3.0);
    for (double T : {1.0, 10.0, 300.0, 1e3, 1e5, 1e9, 1e12}) {
        for (auto family : {WeightFamily::fejer, WeightFamily::bspline4}) {
            const WeightFunction wf = make_weight(family);
            check_close(phi(marks, wf, T), reference::phi_brute_force(marks, wf, T), 1e-12);
        }
    }
}

TEST_CASE("phi: closure of the decomposition") {
    const IntensityMeasure m(9.0);
    for (int r = 0; r < 10; ++r) {
        RngStream rng(7, r);
        const auto marks = build_marks(sample(m, rng), poly2(), 9.0);
        for (double T : {1e2, 1e6, 1e12}) {
            const auto d = phi(marks, bspline(), T);
            REQUIRE(std::abs(d.diag11 + d.diag_tail + d.offdiag - d.total) <= 1e-12);
        }
    }
}

TEST_CASE("phi: scaling all weights by c scales the total by c^2") {
    const IntensityMeasure m(6.0);
    RngStream rng(12, 0);
    const auto marks = build_marks(sample(m, rng), poly2(), 6.0);
    for (double c : {0.5, 3.0, -2.0}) {
        MarkSet scaled = marks;
        for (auto& mk : scaled.marks) {
            mk.weight *= c;
        }
        for (double T : {5.0, 1e4}) {
            CHECK(phi(scaled, bspline(), T).total ==
                  doctest::Approx(c * c * phi(marks, bspline(), T).total).epsilon(1e-12));
        }
    }
}

TEST_CASE("phi: the window keeps pair counts far below M^2") {
    const IntensityMeasure m(10.0);
    RngStream rng(3, 3);
    const auto marks = build_marks(sample(m, rng), poly2(), 10.0);
    REQUIRE(marks.size() > 1000);
    const auto d = phi(marks, bspline(), 1e12);
    CHECK(d.pairs_evaluated < marks.size() * 2);
}

TEST_CASE("offdiag_abs_oracle: decays like 1/T") {
    const double v3 = offdiag_abs_oracle(poly2(), bspline(), 6.0, 1e3, 6);
    const double v4 = offdiag_abs_oracle(poly2(), bspline(), 6.0, 1e4, 6);
    CHECK(v3 / v4 == doctest::Approx(10.0).epsilon(0.25));
    CHECK(offdiag_abs_oracle(poly2(), bspline(), 6.0, 1e12, 6) < 1e-11);
}

TEST_CASE("offdiag_abs_term: regression anchor at (L=6, T=1e3), k = (1,1)") {
    // frozen from a run with rel_tol 1e-13
    CHECK(offdiag_abs_term(1, 1, poly2(), bspline(), 6.0, 1e3) ==
          doctest::Approx(0.00068443443485271952).epsilon(1e-9));
}

TEST_CASE("offdiag_abs_term agrees with the plain double integral") {
    const double L = 4.0;
    const double T = 10.0;
    const IntensityMeasure m(L);
    const auto w = [&](double x) { return 2.0 / L * kernel_HL(x, poly2(), L); };
    const QuadratureSpec spec{1e-12, 1e-8, 200000};
    const double naive = factorial_moment2_oracle(
        [&](double x, double y) { return std::abs(w(x) * w(y) * kernel_UT(x, y, bspline(), T)); },
        m, spec);
    CHECK(offdiag_abs_term(1, 1, poly2(), bspline(), L, T) == doctest::Approx(naive).epsilon(1e-7));
}

TEST_CASE("offdiag_abs_oracle: k truncation at 6 leaves under 2%") {
    const double v6 = offdiag_abs_oracle(poly2(), bspline(), 6.0, 1e3, 6);
    const double v12 = offdiag_abs_oracle(poly2(), bspline(), 6.0, 1e3, 12);
    CHECK(v12 >= v6);
    CHECK((v12 - v6) / v12 < 0.02);
}

TEST_CASE("Monte Carlo |offdiag| matches the oracle") {
    const double L = 5.0;
    const double T = 100.0;
    const IntensityMeasure m(L);
    const int R = 4000;
    std::vector<double> xs(R);
    for (int r = 0; r < R; ++r) {
        RngStream rng(61, r);
        xs[r] = std::abs(phi(build_marks(sample(m, rng), poly2(), L), bspline(), T).offdiag);
    }
    const MeanSe s = mean_se(xs);
    const double oracle = offdiag_abs_oracle(poly2(), bspline(), L, T, 6);
    CHECK(std::abs(s.mean - oracle) <= 4.0 * s.se + 0.02 * oracle);
}

TEST_CASE("d_term: examples") {
    CHECK(d_term(1, 1000000, poly2(), bspline(), 8.0, 1e6) < 1e-30);
    const double d12 = d_term(1, 2, poly2(), bspline(), 8.0, std::exp(24.0));
    CHECK(d12 > 0.0);
    // the bound min(1/(L^2 (k1+k2-2)^2), 1/(k1 k2^3)) with one constant per L,
    // growing no faster than log L
    const auto fitted = [&](double L) {
        double c = 0.0;
        for (int k1 = 1; k1 < 12; ++k1) {
            for (int k2 = 1; k1 + k2 <= 12; ++k2) {
                if (k1 + k2 < 3) {
                    continue;
                }
                const double b = std::min(1.0 / (L * L * (k1 + k2 - 2.0) * (k1 + k2 - 2.0)),
                                          1.0 / (k1 * std::pow(k2, 3.0)));
                c = std::max(c, d_term(k1, k2, poly2(), bspline(), L, std::exp(3 * L)) / b);
            }
        }
        return c;
    };
    const double c8 = fitted(8.0);
    CHECK(d12 <= c8 * std::min(1.0 / 64.0, 1.0 / 8.0));
    CHECK(fitted(32.0) <= 2.0 * c8 * std::log(32.0) / std::log(8.0));
    CHECK_THROWS_AS(d_term(0, 1, poly2(), bspline(), 8.0, 10.0), std::invalid_argument);
}

TEST_CASE("d_term_sum: decreasing like log L / L^2") {
    std::vector<double> r;
    double prev = 1e300;
    for (double L : {8.0, 16.0, 32.0, 64.0}) {
        const double v = d_term_sum(12, poly2(), bspline(), L, std::exp(3 * L));
        CHECK(v < prev);
        prev = v;
        r.push_back(v * L * L / std::log(L));
    }
    const auto [lo, hi] = std::minmax_element(r.begin(), r.end());
    CHECK(*hi / *lo <= 4.0);
}

TEST_CASE("diag11_mean_oracle: examples") {
    CHECK(std::abs(diag11_mean_oracle(poly2(), bspline(), 8.0, 1e6) - 0.4) < 1e-6);
    CHECK(std::abs(diag11_mean_oracle(poly2(), bspline(), 1.0, 1e6) - 0.4) < 1e-6);
    const double c1 = diag11_mean_correction(poly2(), bspline(), 1.0, 10.0);
    const double c2 = diag11_mean_correction(poly2(), bspline(), 1.0, 20.0);
    CHECK(std::abs(c1 / c2) >= 2.0 * 0.7);
    CHECK(diag11_mean_oracle(poly2(), bspline(), 2.0, 3.0) ==
          doctest::Approx(0.4 + diag11_mean_correction(poly2(), bspline(), 2.0, 3.0))
              .epsilon(1e-14));
    CHECK(diag11_mean_oracle(make_zero_testfn(), bspline(), 2.0, 3.0) == 0.0);
}

TEST_CASE("Monte Carlo diag11 mean matches the oracle") {
    const double L = 5.0;
    const double T = 20.0; // small TL so the correction term matters
    const IntensityMeasure m(L);
    const int R = 4000;
    std::vector<double> xs(R);
    for (int r = 0; r < R; ++r) {
        RngStream rng(62, r);
        xs[r] = phi(build_marks(sample(m, rng), poly2(), L), bspline(), T).diag11;
    }
    const MeanSe s = mean_se(xs);
    CHECK(std::abs(s.mean - diag11_mean_oracle(poly2(), bspline(), L, T)) <= 4.0 * s.se);
}

TEST_CASE("diag11_secondmoment_oracles: examples") {
    const auto [a16, b16] = diag11_secondmoment_oracles(poly2(), bspline(), 16.0, std::exp(48.0));
    const auto [a32, b32] = diag11_secondmoment_oracles(poly2(), bspline(), 32.0, std::exp(96.0));
    CHECK(a16 > 0.0);
    CHECK(a32 > 0.0);
    CHECK(a16 / a32 >= 8.0);
    const double mean = diag11_mean_oracle(poly2(), bspline(), 16.0, std::exp(48.0));
    CHECK(b16 == doctest::Approx(mean * mean).epsilon(1e-15));
}

TEST_CASE("diag11 fourth-moment oracle is the variance of the (1,1) sum") {
    // For a Poisson process Var(sum g) = int g^2 dnu.
    const double L = 5.0;
    const double T = 1e3;
    const IntensityMeasure m(L);
    const int R = 4000;
    std::vector<double> xs(R);
    for (int r = 0; r < R; ++r) {
        RngStream rng(63, r);
        xs[r] = phi(build_marks(sample(m, rng), poly2(), L), bspline(), T).diag11;
    }
    const MeanSe s = mean_se(xs);
    const double var = s.se * s.se * R;
    const double oracle = diag11_secondmoment_oracles(poly2(), bspline(), L, T).first;
    // sample variance has relative standard error about sqrt(kurtosis/R)
    CHECK(var == doctest::Approx(oracle).epsilon(0.15));
}
