#pragma once

#include "hypvar/point_process.hpp"
#include "hypvar/quadrature.hpp"
#include "hypvar/test_functions.hpp"

#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace hypvar {

struct WindowParams {
    double L = 1.0;
    double T = 1.0;
    double tau = 0.0;

    void validate() const;
    /// L <= c log T. Reported, never enforced.
    bool is_admissible(double c) const;
};

/// Spectral parameters r_j (lambda_j = 1/4 + r_j^2) of a genus-g surface.
struct EigenvalueList {
    std::vector<double> r_values;
    int genus = 2;

    static EigenvalueList from_values(std::vector<double> r_values, int genus);
};

/// Reads "# genus=G" (required) followed by one r_j >= 0 per line.
EigenvalueList read_eigenvalue_file(const std::string& path);
EigenvalueList parse_eigenvalues(std::istream& in, const std::string& origin);

/// H_L(x) = x fhat(x/L) / sinh(x/2); H_L(0) = 2 fhat(0).
double kernel_HL(double x, const TestFunction& tf, double L);

/// H_{L,tau}(x) = (2x/L) sum_{k >= 1} fhat(kx/L) cos(k x tau) / sinh(kx/2).
/// The k-sum stops exactly at the support of fhat. Rejects x <= 0.
double kernel_H_L_tau(double x, const TestFunction& tf, double L, double tau);

/// U_T(x, y) = omegahat(T(x-y))/2 + omegahat(T(x+y))/2 - omegahat(Tx) omegahat(Ty).
double kernel_UT(double x, double y, const WeightFunction& wf, double T);

/// S_{L,tau} = sum over the configuration of H_{L,tau}(l).
double oscillating_statistic(const LengthConfiguration& cfg, const TestFunction& tf, double L,
                             double tau);

/*!
 * tau -> S_{L,tau} for a fixed configuration, with the per-(l, k)
 * coefficients precomputed. Evaluates the same sum as
 * oscillating_statistic().
 */
class OscillatingStatistic {
public:
    OscillatingStatistic(const LengthConfiguration& cfg, const TestFunction& tf, double L);

    double operator()(double tau) const;
    /// Largest frequency k*l present; 0 for an empty configuration.
    double max_frequency() const { return max_frequency_; }
    std::size_t term_count() const { return frequencies_.size(); }

private:
    std::vector<double> frequencies_;
    std::vector<double> coefficients_;
    double max_frequency_ = 0.0;
};

/*!
 * Smooth term 2(g-1) int f(L(r - tau)) r tanh(pi r) dr, integrated in
 * u = L(r - tau) over the effective support of f.
 */
double smooth_term(int genus, const TestFunction& tf, double L, double tau,
                   const QuadratureSpec& spec = {1e-12, 1e-9});

/// N_{L,tau} = sum_j f(L(r_j - tau)) + f(L(r_j + tau)), restricted to the
/// r_j whose arguments fall inside the effective support of f.
double spectral_count(const EigenvalueList& ev, const TestFunction& tf, double L, double tau);

/// Raised when the weight tail cannot be pushed below the requested bound.
class TailBoundError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct EnergyQuadratureSpec {
    /// Bound on the omega mass discarded outside |tau| <= K T.
    double tail_tol = 1e-4;
    /// Largest admissible K.
    double max_cutoff = 1000.0;
    /// Composite Gauss-Legendre panels per period 2pi/nu_max.
    int panels_per_period = 16;
    /// Upper bound on panel count (cost guard).
    double max_panels = 2e8;
};

/*!
 * E_T[F] = (1/T) int F(tau) omega(tau/T) dtau by composite 8-point
 * Gauss-Legendre on |tau| <= K T, with K chosen from the weight's tail
 * bound and panel width <= (2pi/nu_max)/panels_per_period. The omega mass
 * outside the window is dropped, so F == c returns c (1 - tail).
 */
double energy_average(const std::function<double(double)>& F, const WeightFunction& wf, double T,
                      double nu_max, const EnergyQuadratureSpec& spec = {});

struct DirectVarianceLimits {
    std::size_t max_marks = 10'000;
    double max_T = 1e3;
};

/*!
 * Var_T(S_{L,.}) by quadrature over tau, with S evaluated pointwise. The
 * weights are renormalized by the retained omega mass. An independent
 * route to phi() for small configurations and moderate T; throws
 * BudgetError beyond `limits`.
 */
double energy_variance_direct(const LengthConfiguration& cfg, const TestFunction& tf,
                              const WeightFunction& wf, double L, double T,
                              const EnergyQuadratureSpec& spec = {},
                              const DirectVarianceLimits& limits = {});

} // namespace hypvar
