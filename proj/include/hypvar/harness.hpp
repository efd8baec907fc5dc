#pragma once

#include "hypvar/point_process.hpp"
#include "hypvar/test_functions.hpp"
#include "hypvar/variance.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace hypvar {

struct FhatConfig {
    std::string family = "poly"; // "poly" or "zero"
    int power = 2;
    double radius = 1.0;

    TestFunction build() const;
};

struct ScheduleEntry {
    double L = 0.0;
    double T = 0.0;
    /// Replicate count for this row; falls back to default_replicates(L).
    std::optional<int> replicates;
};

/// 2000 for L <= 6, 500 for L <= 9, 200 beyond.
int default_replicates(double L);

/// Rows (L, exp(rate L)) for each L.
std::vector<ScheduleEntry> exponential_schedule(const std::vector<double>& Ls, double rate);

struct ExperimentConfig {
    std::string experiment_id = "default";
    FhatConfig fhat;
    std::string omega_family = "bspline4";
    std::vector<ScheduleEntry> schedule;
    /// Overrides every row's replicate count when set.
    std::optional<int> replicates;
    double epsilon = 0.05;
    std::uint64_t root_seed = 1;
    SamplerBudget budget;
    std::size_t max_marks = kDefaultMaxMarks;
    /// 0 means one thread per hardware core.
    int threads = 0;
    /// k truncation of the off-diagonal oracle.
    int k_max = 6;
    /// When false, rows carry no oracle values.
    bool attach_oracles = true;
    std::string out_dir = ".";

    /// Throws ConfigError.
    void validate() const;
    int replicates_for(const ScheduleEntry& row) const;
    WeightFunction weight() const;
};

/// Schedule L in {4, 6, 8, 10} with T = exp(3 L).
ExperimentConfig default_experiment_config();

/*!
 * Reads "key = value" lines. Values are numbers, "quoted strings", bare
 * words, true/false, or [comma, separated, lists]. '#' starts a comment.
 *
 *   experiment_id = "conv"
 *   seed = 42
 *   fhat.family = "poly"        fhat.power = 2        fhat.radius = 1.0
 *   omega.family = "bspline4"
 *   schedule.L = [4, 6, 8, 10]
 *   schedule.rate = 3           # T = exp(rate L), or
 *   schedule.T = [1e5, 1e8, 1e10, 1e13]
 *   schedule.replicates = [2000, 2000, 500, 200]
 *   replicates = 100            # overrides all rows
 *   epsilon = 0.05
 *   budget.max_expected_points = 2e7   budget.max_x_max = 24   budget.max_marks = 1e8
 *   threads = 4    k_max = 6    oracles = true    out = "results"
 *
 * Keys left out keep their defaults. Unknown keys and malformed values
 * throw ConfigError naming the line.
 */
ExperimentConfig parse_config(std::istream& in, const std::string& origin);
ExperimentConfig load_config(const std::string& path);

enum class RecordStatus { ok, budget_refused, error };
std::string_view to_string(RecordStatus status);

struct ResultRecord {
    std::string experiment_id;
    double L = 0.0;
    double T = 0.0;
    std::uint64_t replicate = 0;
    std::size_t point_count = 0;
    std::size_t mark_count = 0;
    std::uint64_t pairs = 0;
    VarianceDecomposition phi;
    /// |v_total - sigma2_goe|
    double abs_dev = 0.0;
    RecordStatus status = RecordStatus::ok;
    std::string message;
    double wall_time_ms = 0.0;
};

/// Identifier of one schedule row; replicate r of the row draws from
/// stream_index_for(row_id, r).
std::string row_id(const std::string& experiment_id, double L, double T);

/*!
 * Everything one schedule row shares across its replicates. A row whose
 * budget check fails is still constructible; its replicates come back as
 * budget_refused records.
 */
class RowContext {
public:
    RowContext(const ExperimentConfig& cfg, double L, double T);

    const std::string& id() const { return id_; }
    double L() const { return L_; }
    double T() const { return T_; }
    const TestFunction& test_function() const { return tf_; }
    const WeightFunction& weight() const { return wf_; }
    double sigma2_target() const { return sigma2_; }
    double expected_points() const { return expected_points_; }
    /// Set when sampling this row would exceed the budget.
    const std::optional<std::string>& refusal() const { return refusal_; }

    /// Deterministic in (root_seed, id(), replicate). Never throws on
    /// budget refusal; the record's status says so instead.
    ResultRecord run_replicate(std::uint64_t replicate) const;

private:
    std::uint64_t root_seed_;
    SamplerBudget budget_;
    std::size_t max_marks_;
    std::string id_;
    double L_;
    double T_;
    TestFunction tf_;
    WeightFunction wf_;
    double sigma2_ = 0.0;
    double expected_points_ = 0.0;
    std::optional<std::string> refusal_;
    std::shared_ptr<const IntensityMeasure> measure_;
};

/// Convenience wrapper that builds the row context each call.
ResultRecord run_replicate(const ExperimentConfig& cfg, double L, double T,
                           std::uint64_t replicate);

struct SummaryRow {
    double L = 0.0;
    double T = 0.0;
    int replicates = 0;
    int completed = 0;
    double mean_abs_dev = 0.0;
    /// NaN when fewer than two replicates completed.
    double std_err = 0.0;
    double prob_dev_gt_eps = 0.0;
    double epsilon = 0.0;
    double mean_v_total = 0.0;
    double mean_diag11 = 0.0;
    double mean_abs_offdiag = 0.0;
    double sigma2_target = 0.0;
    /// NaN when oracles are off or failed (see note).
    double oracle_diag11 = 0.0;
    double oracle_offdiag_abs = 0.0;
    double oracle_k_tail = 0.0;
    /// prob_dev_gt_eps <= mean_abs_dev/eps + 4 binomial standard errors
    bool markov_consistent = true;
    std::string status; // "ok", "budget_refused", "partial"
    std::string note;
};

struct ScheduleResult {
    std::vector<ResultRecord> records;
    std::vector<SummaryRow> summary;
};

/// Called once per row with that row's records in replicate order.
using RecordSink = std::function<void(const std::vector<ResultRecord>&)>;

/*!
 * Runs every schedule row: replicates in parallel on cfg.threads workers,
 * then a sequential reduction in replicate order, so the output does not
 * depend on the thread count. A failing oracle only annotates its row.
 */
ScheduleResult run_schedule(const ExperimentConfig& cfg, const RecordSink& sink = {});

SummaryRow summarize(const std::vector<ResultRecord>& records, double L, double T, int replicates,
                     double epsilon, double sigma2_target);

inline constexpr const char* kRecordCsvHeader =
    "experiment_id,L,T,replicate,point_count,mark_count,pairs,v_total,diag11,diag_tail,offdiag,"
    "abs_dev,status,wall_time_ms";

void write_records_csv_header(std::ostream& out);
/// Rows that did not complete print "NA" in their numeric columns.
void write_record_csv(std::ostream& out, const ResultRecord& rec);
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);
void write_summary_json(std::ostream& out, const ExperimentConfig& cfg,
                        const std::vector<SummaryRow>& rows);

/// Runs fn(i) for i in [0, n) on up to `threads` workers (0: hardware).
/// The first exception thrown by any task is rethrown after all workers join.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

} // namespace hypvar
