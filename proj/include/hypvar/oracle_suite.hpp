#pragma once

#include "hypvar/harness.hpp"

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace hypvar {

struct CheckResult {
    std::string id;    // "A1" ...
    std::string title;
    bool passed = false;
    std::vector<std::pair<std::string, double>> measured;
    std::string detail;
    double seconds = 0.0;
};

struct OracleSuiteOptions {
    /// Added to the GOE target before comparing (negative control).
    double sigma2_offset = 0.0;
    /// Skip the Monte Carlo halves of A2 and A4.
    bool monte_carlo = true;
    int mc_replicates = 2000;
};

struct OracleReport {
    std::vector<CheckResult> checks;
    bool all_passed() const;
};

/// GOE target against 2 C0^2/(2p+1).
CheckResult check_goe_target(const ExperimentConfig& cfg, const OracleSuiteOptions& opts = {});
/// (1,1) identity: oracle at TL >= 1e6 and Monte Carlo at L = 8, T = 1e6.
CheckResult check_diag11_identity(const ExperimentConfig& cfg, const OracleSuiteOptions& opts = {});
/// phi vs direct energy quadrature, and window scan vs brute force.
CheckResult check_closed_form(const ExperimentConfig& cfg, const OracleSuiteOptions& opts = {});
/// 1/T decay of the off-diagonal oracle at L = 6 and its Monte Carlo mean.
CheckResult check_offdiag_decay(const ExperimentConfig& cfg, const OracleSuiteOptions& opts = {});
/// d_term sum over 3 <= k1 + k2 <= 12 against c log L / L^2.
CheckResult check_k_tail(const ExperimentConfig& cfg, const OracleSuiteOptions& opts = {});

/// A1 through A5 in order. A check that throws is reported as failed.
OracleReport run_oracle_suite(const ExperimentConfig& cfg, const OracleSuiteOptions& opts = {});

/// Convergence schedule L in {4, 6, 8, 10}, T = exp(3L), default R.
CheckResult check_convergence(const ExperimentConfig& cfg);
/// Poisson bin-count law of the sampler at x_max = 6 over 5000 draws.
CheckResult check_sampler_law(const ExperimentConfig& cfg);

/// One line per check: "<id> PASS|FAIL <title>: name=value ... [detail]".
void write_report_text(std::ostream& out, const std::vector<CheckResult>& checks);
void write_report_json(std::ostream& out, const std::vector<CheckResult>& checks);

} // namespace hypvar
