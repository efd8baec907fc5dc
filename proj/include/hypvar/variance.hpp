#pragma once

#include "hypvar/point_process.hpp"
#include "hypvar/quadrature.hpp"
#include "hypvar/test_functions.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace hypvar {

/// One winding mark m = k * l of configuration point `point_id`.
struct Mark {
    double m;
    std::uint32_t k;
    std::uint32_t point_id;
    /// (2/L) H_L(k l) / k
    double weight;
};

/*!
 * All admissible (point, k) pairs of a configuration, i.e. k l < C0 L,
 * sorted by mark value with ties broken by (point_id, k).
 */
struct MarkSet {
    std::vector<Mark> marks;
    double L = 0.0;
    double support = 0.0; // C0 L
    std::size_t point_count = 0;

    std::size_t size() const { return marks.size(); }
    bool empty() const { return marks.empty(); }
};

inline constexpr std::size_t kDefaultMaxMarks = 100'000'000;

/// Throws BudgetError when the mark count would exceed max_marks.
MarkSet build_marks(const LengthConfiguration& cfg, const TestFunction& tf, double L,
                    std::size_t max_marks = kDefaultMaxMarks);

/// Number of marks build_marks would produce, without allocating them.
std::size_t count_marks(const LengthConfiguration& cfg, const TestFunction& tf, double L);

struct VarianceDecomposition {
    double total = 0.0;
    double diag11 = 0.0;    // same point, k1 = k2 = 1
    double diag_tail = 0.0; // same point, k1 + k2 >= 3
    double offdiag = 0.0;   // distinct points
    std::uint64_t pairs_evaluated = 0;
};

/*!
 * phi_{T,L}(mu) = sum over ordered mark pairs of w_a w_b U_T(m_a, m_b).
 *
 * Since omegahat vanishes off (-1, 1), U_T(x, y) is nonzero only when
 * |x - y| < 1/T or both x, y < 1/T. The sum therefore runs over (i) all
 * pairs inside the prefix of marks <= 1/T and (ii) a sliding window of
 * width 1/T over the sorted marks, skipping pairs already covered by (i).
 * Nothing is dropped. Each class is summed in sorted-mark order with
 * compensated summation.
 */
VarianceDecomposition phi(const MarkSet& marks, const WeightFunction& wf, double T);

/// Tunables shared by the quadrature oracles below.
struct OracleOptions {
    QuadratureSpec quad{1e-18, 1e-10, 4000};
};

/*!
 * k-truncated E[sum_{l1 != l2} sum_{k1,k2 <= k_max} |w w U_T|] under the
 * Poisson model, by iterated quadrature. The inner variable runs over the
 * window |k1 x - k2 y| <= 1/T; the small region k1 x <= 1/T, where the
 * other two terms of U_T live, is integrated with the full kernel.
 */
double offdiag_abs_oracle(const TestFunction& tf, const WeightFunction& wf, double L, double T,
                          int k_max, const OracleOptions& opts = {});

/// One (k1, k2) term of offdiag_abs_oracle.
double offdiag_abs_term(int k1, int k2, const TestFunction& tf, const WeightFunction& wf,
                        double L, double T, const OracleOptions& opts = {});

/// D(k1, k2) = (4/L^2) int |H_L(k1 x) H_L(k2 x)| / (k1 k2) |U_T(k1 x, k2 x)| dnu(x).
double d_term(int k1, int k2, const TestFunction& tf, const WeightFunction& wf, double L, double T,
              const OracleOptions& opts = {});

/// sum of d_term over 3 <= k1 + k2 <= max_sum.
double d_term_sum(int max_sum, const TestFunction& tf, const WeightFunction& wf, double L,
                  double T, const OracleOptions& opts = {});

/*!
 * E[(4/L^2) sum_x H_L(x)^2 U_T(x, x)]
 *   = 4 int fhat(y)^2 y dy + 4 int fhat(y)^2 y (omegahat(2TLy) - 2 omegahat(TLy)^2) dy.
 * The first term is Sigma^2_GOE(f).
 */
double diag11_mean_oracle(const TestFunction& tf, const WeightFunction& wf, double L, double T,
                          const OracleOptions& opts = {});

/// The second (correction) term of diag11_mean_oracle alone.
double diag11_mean_correction(const TestFunction& tf, const WeightFunction& wf, double L, double T,
                              const OracleOptions& opts = {});

/*!
 * (E[(16/L^4) sum_x H_L(x)^4 U_T(x,x)^2], diag11_mean_oracle^2): the
 * diagonal and off-diagonal pieces of the second moment of the (1,1) sum.
 */
std::pair<double, double> diag11_secondmoment_oracles(const TestFunction& tf,
                                                      const WeightFunction& wf, double L, double T,
                                                      const OracleOptions& opts = {});

} // namespace hypvar
