#include "hypvar/harness.hpp"

#include "hypvar/errors.hpp"
#include "hypvar/numerics.hpp"
#include "hypvar/random.hpp"
#include "hypvar/text_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>
#include <variant>

namespace hypvar {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::optional<double> parse_number(const std::string& s) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (first != last && *first == '+') {
        ++first;
    }
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last || first == last) {
        return std::nullopt;
    }
    return v;
}

using ConfigValue = std::variant<double, std::string, bool, std::vector<double>>;

struct ConfigEntry {
    ConfigValue value;
    std::size_t line;
};

[[noreturn]] void config_fail(const std::string& origin, std::size_t line, const std::string& what) {
    std::ostringstream msg;
    msg << origin;
    if (line > 0) {
        msg << ":" << line;
    }
    msg << ": " << what;
    throw ConfigError(msg.str());
}

ConfigValue parse_value(const std::string& text, const std::string& origin, std::size_t line) {
    if (text.empty()) {
        config_fail(origin, line, "missing value");
    }
    if (text.front() == '"') {
        if (text.size() < 2 || text.back() != '"') {
            config_fail(origin, line, "unterminated string " + text);
        }
        return text.substr(1, text.size() - 2);
    }
    if (text.front() == '[') {
        if (text.back() != ']') {
            config_fail(origin, line, "unterminated list " + text);
        }
        std::vector<double> items;
        const std::string body = trim(std::string_view(text).substr(1, text.size() - 2));
        if (body.empty()) {
            return items;
        }
        std::istringstream parts(body);
        std::string item;
        while (std::getline(parts, item, ',')) {
            const auto v = parse_number(trim(item));
            if (!v) {
                config_fail(origin, line, "list entries must be numbers, got '" + trim(item) + "'");
            }
            items.push_back(*v);
        }
        return items;
    }
    if (text == "true" || text == "false") {
        return text == "true";
    }
    if (const auto v = parse_number(text)) {
        return *v;
    }
    return text;
}

// Strips a trailing comment, leaving '#' inside quotes alone.
std::string strip_comment(const std::string& line) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') {
            quoted = !quoted;
        } else if (line[i] == '#' && !quoted) {
            return line.substr(0, i);
        }
    }
    return line;
}

class ConfigReader {
public:
    ConfigReader(std::map<std::string, ConfigEntry> entries, std::string origin)
        : entries_(std::move(entries)), origin_(std::move(origin)) {}

    bool has(const std::string& key) const { return entries_.count(key) > 0; }

    double number(const std::string& key) {
        const auto& e = take(key);
        if (const auto* v = std::get_if<double>(&e.value)) {
            return *v;
        }
        config_fail(origin_, e.line, key + " must be a number");
    }

    template <class Int>
    Int integer(const std::string& key, double lo, double hi) {
        const auto line = entries_.at(key).line;
        const double v = number(key);
        if (v != std::floor(v) || v < lo || v > hi) {
            config_fail(origin_, line, key + " must be an integer in [" + format_real(lo) + ", " +
                                           format_real(hi) + "]");
        }
        return static_cast<Int>(v);
    }

    std::string string(const std::string& key) {
        const auto& e = take(key);
        if (const auto* v = std::get_if<std::string>(&e.value)) {
            return *v;
        }
        config_fail(origin_, e.line, key + " must be a string");
    }

    bool boolean(const std::string& key) {
        const auto& e = take(key);
        if (const auto* v = std::get_if<bool>(&e.value)) {
            return *v;
        }
        config_fail(origin_, e.line, key + " must be true or false");
    }

    std::vector<double> list(const std::string& key) {
        const auto& e = take(key);
        if (const auto* v = std::get_if<std::vector<double>>(&e.value)) {
            return *v;
        }
        if (const auto* v = std::get_if<double>(&e.value)) {
            return {*v};
        }
        config_fail(origin_, e.line, key + " must be a list of numbers");
    }

    std::size_t line(const std::string& key) const { return entries_.at(key).line; }

    void reject_unused() const {
        for (const auto& [key, entry] : entries_) {
            if (!used_.count(key)) {
                config_fail(origin_, entry.line, "unknown key '" + key + "'");
            }
        }
    }

private:
    const ConfigEntry& take(const std::string& key) {
        used_.insert(key);
        return entries_.at(key);
    }

    std::map<std::string, ConfigEntry> entries_;
    std::set<std::string> used_;
    std::string origin_;
};

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    out += '"';
    return out;
}

std::string csv_real(double x) {
    return std::isfinite(x) ? format_real(x) : std::string("NA");
}

nlohmann::json json_real(double x) {
    return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr);
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
}

} // namespace

TestFunction FhatConfig::build() const {
    if (family == "poly" || family == "polynomial") {
        return make_polynomial_testfn(power, radius);
    }
    if (family == "zero") {
        return make_zero_testfn(radius);
    }
    throw ConfigError("unknown fhat.family '" + family + "' (expected poly or zero)");
}

int default_replicates(double L) {
    if (L <= 6.0) {
        return 2000;
    }
    if (L <= 9.0) {
        return 500;
    }
    return 200;
}

std::vector<ScheduleEntry> exponential_schedule(const std::vector<double>& Ls, double rate) {
    std::vector<ScheduleEntry> rows;
    rows.reserve(Ls.size());
    for (double L : Ls) {
        rows.push_back(ScheduleEntry{L, std::exp(rate * L), std::nullopt});
    }
    return rows;
}

void ExperimentConfig::validate() const {
    if (experiment_id.empty() ||
        experiment_id.find_first_of(",\"\n\r") != std::string::npos) {
        throw ConfigError("experiment_id must be nonempty and free of commas, quotes and newlines");
    }
    if (fhat.family != "zero") {
        if (fhat.power < 2) {
            throw ConfigError("fhat.power must be >= 2");
        }
    }
    if (!(fhat.radius > 0.0) || !std::isfinite(fhat.radius)) {
        throw ConfigError("fhat.radius must be > 0");
    }
    (void)fhat.build();
    try {
        (void)parse_weight_family(omega_family);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (schedule.empty()) {
        throw ConfigError("schedule is empty");
    }
    for (const auto& row : schedule) {
        if (!(row.L > 0.0) || !std::isfinite(row.L) || !(row.T > 0.0) || !std::isfinite(row.T)) {
            throw ConfigError("schedule rows need finite L > 0 and T > 0");
        }
        if (row.replicates && *row.replicates < 1) {
            throw ConfigError("schedule replicates must be >= 1");
        }
    }
    if (replicates && *replicates < 1) {
        throw ConfigError("replicates must be >= 1");
    }
    if (!(epsilon > 0.0)) {
        throw ConfigError("epsilon must be > 0");
    }
    try {
        budget.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (max_marks == 0) {
        throw ConfigError("budget.max_marks must be >= 1");
    }
    if (threads < 0) {
        throw ConfigError("threads must be >= 0");
    }
    if (k_max < 1) {
        throw ConfigError("k_max must be >= 1");
    }
}

int ExperimentConfig::replicates_for(const ScheduleEntry& row) const {
    if (replicates) {
        return *replicates;
    }
    return row.replicates.value_or(default_replicates(row.L));
}

WeightFunction ExperimentConfig::weight() const {
    try {
        return make_weight(omega_family);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

ExperimentConfig default_experiment_config() {
    ExperimentConfig cfg;
    cfg.schedule = exponential_schedule({4.0, 6.0, 8.0, 10.0}, 3.0);
    return cfg;
}

ExperimentConfig parse_config(std::istream& in, const std::string& origin) {
    std::map<std::string, ConfigEntry> entries;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(strip_comment(raw));
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            config_fail(origin, line_no, "expected 'key = value', got '" + line + "'");
        }
        const std::string key = trim(std::string_view(line).substr(0, eq));
        if (key.empty()) {
            config_fail(origin, line_no, "empty key");
        }
        if (entries.count(key)) {
            config_fail(origin, line_no, "duplicate key '" + key + "'");
        }
        entries.emplace(key, ConfigEntry{parse_value(trim(std::string_view(line).substr(eq + 1)),
                                                     origin, line_no),
                                         line_no});
    }

    ConfigReader r(std::move(entries), origin);
    ExperimentConfig cfg = default_experiment_config();
    if (r.has("experiment_id")) {
        cfg.experiment_id = r.string("experiment_id");
    }
    if (r.has("seed")) {
        cfg.root_seed = r.integer<std::uint64_t>("seed", 0, 9007199254740992.0);
    }
    if (r.has("fhat.family")) {
        cfg.fhat.family = r.string("fhat.family");
    }
    if (r.has("fhat.power")) {
        cfg.fhat.power = r.integer<int>("fhat.power", 2, 64);
    }
    if (r.has("fhat.radius")) {
        cfg.fhat.radius = r.number("fhat.radius");
    }
    if (r.has("omega.family")) {
        cfg.omega_family = r.string("omega.family");
    }

    const bool has_L = r.has("schedule.L");
    const bool has_rate = r.has("schedule.rate");
    const bool has_T = r.has("schedule.T");
    if (!has_L && (has_rate || has_T || r.has("schedule.replicates"))) {
        config_fail(origin, 0, "schedule.rate, schedule.T and schedule.replicates need schedule.L");
    }
    if (has_L) {
        const std::size_t line = r.line("schedule.L");
        const auto Ls = r.list("schedule.L");
        if (has_rate && has_T) {
            config_fail(origin, line, "give either schedule.rate or schedule.T, not both");
        }
        if (has_T) {
            const auto Ts = r.list("schedule.T");
            if (Ts.size() != Ls.size()) {
                config_fail(origin, line, "schedule.T and schedule.L differ in length");
            }
            cfg.schedule.clear();
            for (std::size_t i = 0; i < Ls.size(); ++i) {
                cfg.schedule.push_back(ScheduleEntry{Ls[i], Ts[i], std::nullopt});
            }
        } else {
            cfg.schedule = exponential_schedule(Ls, has_rate ? r.number("schedule.rate") : 3.0);
        }
        if (r.has("schedule.replicates")) {
            const auto Rs = r.list("schedule.replicates");
            if (Rs.size() != Ls.size()) {
                config_fail(origin, line, "schedule.replicates and schedule.L differ in length");
            }
            for (std::size_t i = 0; i < Rs.size(); ++i) {
                if (Rs[i] != std::floor(Rs[i]) || Rs[i] < 1 || Rs[i] > 1e9) {
                    config_fail(origin, line, "schedule.replicates entries must be integers >= 1");
                }
                cfg.schedule[i].replicates = static_cast<int>(Rs[i]);
            }
        }
    }
    if (r.has("replicates")) {
        cfg.replicates = r.integer<int>("replicates", 1, 1e9);
    }
    if (r.has("epsilon")) {
        cfg.epsilon = r.number("epsilon");
    }
    if (r.has("budget.max_expected_points")) {
        cfg.budget.max_expected_points = r.number("budget.max_expected_points");
    }
    if (r.has("budget.max_x_max")) {
        cfg.budget.max_x_max = r.number("budget.max_x_max");
    }
    if (r.has("budget.max_marks")) {
        cfg.max_marks = r.integer<std::size_t>("budget.max_marks", 1, 1e15);
    }
    if (r.has("threads")) {
        cfg.threads = r.integer<int>("threads", 0, 4096);
    }
    if (r.has("k_max")) {
        cfg.k_max = r.integer<int>("k_max", 1, 1000);
    }
    if (r.has("oracles")) {
        cfg.attach_oracles = r.boolean("oracles");
    }
    if (r.has("out")) {
        cfg.out_dir = r.string("out");
    }
    r.reject_unused();
    try {
        cfg.validate();
    } catch (const ConfigError& e) {
        config_fail(origin, 0, e.what());
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file '" + path + "'");
    }
    return parse_config(in, path);
}

std::string_view to_string(RecordStatus status) {
    switch (status) {
    case RecordStatus::ok:
        return "ok";
    case RecordStatus::budget_refused:
        return "budget_refused";
    case RecordStatus::error:
        return "error";
    }
    return "error";
}

std::string row_id(const std::string& experiment_id, double L, double T) {
    return experiment_id + "/L=" + format_real(L) + "/T=" + format_real(T);
}

RowContext::RowContext(const ExperimentConfig& cfg, double L, double T)
    : root_seed_(cfg.root_seed),
      budget_(cfg.budget),
      max_marks_(cfg.max_marks),
      id_(row_id(cfg.experiment_id, L, T)),
      L_(L),
      T_(T),
      tf_(cfg.fhat.build()),
      wf_(cfg.weight()) {
    if (!(L > 0.0) || !(T > 0.0)) {
        throw ConfigError("schedule rows need L > 0 and T > 0");
    }
    sigma2_ = tf_.sigma2_goe();
    const double x_max = tf_.support_radius() * L;
    if (x_max > budget_.max_x_max) {
        std::ostringstream msg;
        msg << "x_max = " << x_max << " exceeds budget.max_x_max = " << budget_.max_x_max;
        refusal_ = msg.str();
        expected_points_ = kNaN;
        return;
    }
    expected_points_ = intensity_mass(x_max);
    if (expected_points_ > budget_.max_expected_points) {
        std::ostringstream msg;
        msg << "expected point count " << expected_points_
            << " exceeds budget.max_expected_points = " << budget_.max_expected_points;
        refusal_ = msg.str();
        return;
    }
    measure_ = std::make_shared<const IntensityMeasure>(x_max);
}

ResultRecord RowContext::run_replicate(std::uint64_t replicate) const {
    const auto start = std::chrono::steady_clock::now();
    ResultRecord rec;
    rec.experiment_id = id_;
    rec.L = L_;
    rec.T = T_;
    rec.replicate = replicate;
    const auto fail = [&](RecordStatus status, const std::string& message) {
        rec.status = status;
        rec.message = message;
        rec.phi = VarianceDecomposition{kNaN, kNaN, kNaN, kNaN, 0};
        rec.abs_dev = kNaN;
    };
    if (refusal_) {
        fail(RecordStatus::budget_refused, *refusal_);
        rec.wall_time_ms = elapsed_ms(start);
        return rec;
    }
    try {
        RngStream rng(root_seed_, stream_index_for(id_, replicate));
        const LengthConfiguration cfg = sample(*measure_, rng, budget_);
        rec.point_count = cfg.count();
        const MarkSet marks = build_marks(cfg, tf_, L_, max_marks_);
        rec.mark_count = marks.size();
        rec.phi = phi(marks, wf_, T_);
        rec.pairs = rec.phi.pairs_evaluated;
        rec.abs_dev = std::abs(rec.phi.total - sigma2_);
    } catch (const BudgetError& e) {
        fail(RecordStatus::budget_refused, e.what());
    } catch (const std::exception& e) {
        fail(RecordStatus::error, e.what());
    }
    rec.wall_time_ms = elapsed_ms(start);
    return rec;
}

ResultRecord run_replicate(const ExperimentConfig& cfg, double L, double T,
                           std::uint64_t replicate) {
    return RowContext(cfg, L, T).run_replicate(replicate);
}

SummaryRow summarize(const std::vector<ResultRecord>& records, double L, double T, int replicates,
                     double epsilon, double sigma2_target) {
    SummaryRow row;
    row.L = L;
    row.T = T;
    row.replicates = replicates;
    row.epsilon = epsilon;
    row.sigma2_target = sigma2_target;
    row.oracle_diag11 = kNaN;
    row.oracle_offdiag_abs = kNaN;
    row.oracle_k_tail = kNaN;

    CompensatedSum dev;
    CompensatedSum dev2;
    CompensatedSum v;
    CompensatedSum d11;
    CompensatedSum off;
    int exceed = 0;
    int refused = 0;
    for (const auto& rec : records) {
        if (rec.status == RecordStatus::budget_refused) {
            ++refused;
        }
        if (rec.status != RecordStatus::ok) {
            continue;
        }
        ++row.completed;
        dev += rec.abs_dev;
        dev2 += rec.abs_dev * rec.abs_dev;
        v += rec.phi.total;
        d11 += rec.phi.diag11;
        off += std::abs(rec.phi.offdiag);
        if (rec.abs_dev > epsilon) {
            ++exceed;
        }
    }
    const int n = row.completed;
    if (n == 0) {
        row.mean_abs_dev = row.std_err = row.prob_dev_gt_eps = kNaN;
        row.mean_v_total = row.mean_diag11 = row.mean_abs_offdiag = kNaN;
        row.markov_consistent = true;
        row.status = refused > 0 ? "budget_refused" : "error";
        return row;
    }
    row.mean_abs_dev = dev.value() / n;
    if (n >= 2) {
        const double var =
            std::max(0.0, (dev2.value() - n * row.mean_abs_dev * row.mean_abs_dev) / (n - 1));
        row.std_err = std::sqrt(var / n);
    } else {
        row.std_err = kNaN;
    }
    row.prob_dev_gt_eps = static_cast<double>(exceed) / n;
    row.mean_v_total = v.value() / n;
    row.mean_diag11 = d11.value() / n;
    row.mean_abs_offdiag = off.value() / n;
    const double p = row.prob_dev_gt_eps;
    row.markov_consistent =
        p <= row.mean_abs_dev / epsilon + 4.0 * std::sqrt(p * (1.0 - p) / n) + 1e-12;
    row.status = n == replicates ? "ok" : "partial";
    return row;
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
    std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads)
                                      : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    const auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!first_error) {
                    first_error = std::current_exception();
                }
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t) {
        pool.emplace_back(work);
    }
    for (auto& t : pool) {
        t.join();
    }
    if (first_error) {
        std::rethrow_exception(first_error);
    }
}

ScheduleResult run_schedule(const ExperimentConfig& cfg, const RecordSink& sink) {
    cfg.validate();
    ScheduleResult result;
    for (const auto& entry : cfg.schedule) {
        const int R = cfg.replicates_for(entry);
        const RowContext ctx(cfg, entry.L, entry.T);
        std::vector<ResultRecord> records(static_cast<std::size_t>(R));
        parallel_for(records.size(), cfg.threads,
                     [&](std::size_t r) { records[r] = ctx.run_replicate(r); });

        SummaryRow row = summarize(records, entry.L, entry.T, R, cfg.epsilon, ctx.sigma2_target());
        if (ctx.refusal()) {
            row.note = *ctx.refusal();
        }
        if (cfg.attach_oracles) {
            const auto& tf = ctx.test_function();
            const auto& wf = ctx.weight();
            const auto attach = [&](const char* name, double& slot, auto&& compute) {
                try {
                    slot = compute();
                } catch (const std::exception& e) {
                    slot = kNaN;
                    if (!row.note.empty()) {
                        row.note += "; ";
                    }
                    row.note += std::string(name) + ": " + e.what();
                }
            };
            attach("oracle_diag11", row.oracle_diag11,
                   [&] { return diag11_mean_oracle(tf, wf, entry.L, entry.T); });
            attach("oracle_offdiag_abs", row.oracle_offdiag_abs,
                   [&] { return offdiag_abs_oracle(tf, wf, entry.L, entry.T, cfg.k_max); });
            attach("oracle_k_tail", row.oracle_k_tail,
                   [&] { return d_term_sum(12, tf, wf, entry.L, entry.T); });
        }
        if (sink) {
            sink(records);
        }
        result.summary.push_back(std::move(row));
        result.records.insert(result.records.end(), std::make_move_iterator(records.begin()),
                              std::make_move_iterator(records.end()));
    }
    return result;
}

void write_records_csv_header(std::ostream& out) {
    out << kRecordCsvHeader << '\n';
}

void write_record_csv(std::ostream& out, const ResultRecord& rec) {
    out << csv_field(rec.experiment_id) << ',' << format_real(rec.L) << ',' << format_real(rec.T)
        << ',' << rec.replicate << ',';
    if (rec.status == RecordStatus::ok) {
        out << rec.point_count << ',' << rec.mark_count << ',' << rec.pairs << ','
            << format_real(rec.phi.total) << ',' << format_real(rec.phi.diag11) << ','
            << format_real(rec.phi.diag_tail) << ',' << format_real(rec.phi.offdiag) << ','
            << format_real(rec.abs_dev) << ',';
    } else {
        out << "NA,NA,NA,NA,NA,NA,NA,NA,";
    }
    out << to_string(rec.status) << ',' << format_real(rec.wall_time_ms) << '\n';
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
    out << "L,T,R,completed,mean_abs_dev,std_err,prob_dev_gt_eps,epsilon,mean_v_total,"
           "mean_diag11,mean_abs_offdiag,sigma2_target,oracle_diag11,oracle_offdiag_abs,"
           "oracle_k_tail,markov_consistent,status,note\n";
    for (const auto& r : rows) {
        out << format_real(r.L) << ',' << format_real(r.T) << ',' << r.replicates << ','
            << r.completed << ',' << csv_real(r.mean_abs_dev) << ',' << csv_real(r.std_err) << ','
            << csv_real(r.prob_dev_gt_eps) << ',' << format_real(r.epsilon) << ','
            << csv_real(r.mean_v_total) << ',' << csv_real(r.mean_diag11) << ','
            << csv_real(r.mean_abs_offdiag) << ',' << csv_real(r.sigma2_target) << ','
            << csv_real(r.oracle_diag11) << ',' << csv_real(r.oracle_offdiag_abs) << ','
            << csv_real(r.oracle_k_tail) << ',' << (r.markov_consistent ? "true" : "false") << ','
            << r.status << ',' << csv_field(r.note) << '\n';
    }
}

void write_summary_json(std::ostream& out, const ExperimentConfig& cfg,
                        const std::vector<SummaryRow>& rows) {
    nlohmann::json doc;
    doc["experiment_id"] = cfg.experiment_id;
    doc["root_seed"] = cfg.root_seed;
    doc["epsilon"] = cfg.epsilon;
    doc["fhat"] = {{"family", cfg.fhat.family},
                   {"power", cfg.fhat.power},
                   {"radius", cfg.fhat.radius}};
    doc["omega"] = {{"family", cfg.omega_family}};
    doc["k_max"] = cfg.k_max;
    auto& list = doc["rows"] = nlohmann::json::array();
    for (const auto& r : rows) {
        list.push_back({{"L", r.L},
                        {"T", r.T},
                        {"R", r.replicates},
                        {"completed", r.completed},
                        {"mean_abs_dev", json_real(r.mean_abs_dev)},
                        {"std_err", json_real(r.std_err)},
                        {"prob_dev_gt_eps", json_real(r.prob_dev_gt_eps)},
                        {"epsilon", r.epsilon},
                        {"mean_v_total", json_real(r.mean_v_total)},
                        {"mean_diag11", json_real(r.mean_diag11)},
                        {"mean_abs_offdiag", json_real(r.mean_abs_offdiag)},
                        {"sigma2_target", json_real(r.sigma2_target)},
                        {"oracle_diag11", json_real(r.oracle_diag11)},
                        {"oracle_offdiag_abs", json_real(r.oracle_offdiag_abs)},
                        {"oracle_k_tail", json_real(r.oracle_k_tail)},
                        {"markov_consistent", r.markov_consistent},
                        {"status", r.status},
                        {"note", r.note}});
    }
    out << doc.dump(2) << '\n';
}

} // namespace hypvar
