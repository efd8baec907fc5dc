#include "hypvar/errors.hpp"
#include "hypvar/harness.hpp"
#include "hypvar/oracle_suite.hpp"
#include "hypvar/point_process.hpp"
#include "hypvar/random.hpp"
#include "hypvar/spectral.hpp"
#include "hypvar/text_io.hpp"
#include "hypvar/variance.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using namespace hypvar;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kConfigError = 2, kBudgetRefusal = 3, kOracleFailure = 4 };

struct GlobalOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::string out_dir;
    std::string format;
};

ExperimentConfig resolve_config(const GlobalOptions& g) {
    ExperimentConfig cfg =
        g.config_path.empty() ? default_experiment_config() : load_config(g.config_path);
    if (g.seed) {
        cfg.root_seed = *g.seed;
    }
    if (g.threads) {
        cfg.threads = *g.threads;
    }
    if (!g.out_dir.empty()) {
        cfg.out_dir = g.out_dir;
    }
    cfg.validate();
    return cfg;
}

std::ofstream open_output(const fs::path& path) {
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    std::ofstream out(path);
    if (!out) {
        throw ConfigError("cannot write '" + path.string() + "'");
    }
    return out;
}

void write_report_csv(std::ostream& out, const std::vector<CheckResult>& checks) {
    out << "id,passed,title,measured,seconds,detail\n";
    for (const auto& c : checks) {
        std::string measured;
        for (const auto& [name, value] : c.measured) {
            if (!measured.empty()) {
                measured += ';';
            }
            measured += name + "=" + format_real(value);
        }
        std::string detail = c.detail;
        for (auto& ch : detail) {
            if (ch == ',' || ch == '"') {
                ch = ' ';
            }
        }
        out << c.id << ',' << (c.passed ? "true" : "false") << ',' << c.title << ',' << measured
            << ',' << format_real(c.seconds) << ',' << detail << '\n';
    }
}

int cmd_oracle(const GlobalOptions& g, double sigma2_offset, bool no_mc, int mc_replicates) {
    const ExperimentConfig cfg = resolve_config(g);
    OracleSuiteOptions opts;
    opts.sigma2_offset = sigma2_offset;
    opts.monte_carlo = !no_mc;
    opts.mc_replicates = mc_replicates;
    const OracleReport report = run_oracle_suite(cfg, opts);
    if (g.format == "json") {
        write_report_json(std::cout, report.checks);
    } else if (g.format == "csv") {
        write_report_csv(std::cout, report.checks);
    } else {
        write_report_text(std::cout, report.checks);
    }
    if (!g.out_dir.empty()) {
        auto out = open_output(fs::path(g.out_dir) / "oracle_report.json");
        write_report_json(out, report.checks);
    }
    return report.all_passed() ? kOk : kOracleFailure;
}

int cmd_experiment(const GlobalOptions& g, std::optional<int> replicates) {
    ExperimentConfig cfg = resolve_config(g);
    if (replicates) {
        cfg.replicates = *replicates;
    }
    cfg.validate();
    const fs::path dir(cfg.out_dir);
    auto records_out = open_output(dir / (cfg.experiment_id + "_records.csv"));
    write_records_csv_header(records_out);
    bool refused = false;
    const ScheduleResult result = run_schedule(cfg, [&](const std::vector<ResultRecord>& rows) {
        for (const auto& rec : rows) {
            write_record_csv(records_out, rec);
            refused = refused || rec.status == RecordStatus::budget_refused;
        }
        records_out.flush();
        if (!rows.empty()) {
            std::cerr << "row L=" << format_real(rows.front().L) << " T="
                      << format_real(rows.front().T) << ": " << rows.size() << " replicates\n";
        }
    });
    {
        auto out = open_output(dir / (cfg.experiment_id + "_summary.json"));
        write_summary_json(out, cfg, result.summary);
    }
    {
        auto out = open_output(dir / (cfg.experiment_id + "_summary.csv"));
        write_summary_csv(out, result.summary);
    }
    if (g.format == "json") {
        write_summary_json(std::cout, cfg, result.summary);
    } else {
        write_summary_csv(std::cout, result.summary);
    }
    return refused ? kBudgetRefusal : kOk;
}

LengthConfiguration draw(const ExperimentConfig& cfg, double x_max, std::uint64_t stream) {
    const IntensityMeasure measure(x_max);
    check_budget(measure, cfg.budget);
    RngStream rng(cfg.root_seed, stream);
    return sample(measure, rng, cfg.budget);
}

int cmd_sample(const GlobalOptions& g, std::optional<double> x_max, std::optional<double> L,
               std::uint64_t stream) {
    const ExperimentConfig cfg = resolve_config(g);
    if (x_max.has_value() == L.has_value()) {
        throw ConfigError("sample: give exactly one of --x-max or --L");
    }
    const double xm = x_max ? *x_max : cfg.fhat.build().support_radius() * *L;
    const LengthConfiguration c = draw(cfg, xm, stream);
    const auto emit = [&](std::ostream& out) {
        if (g.format == "json") {
            nlohmann::json doc{{"root_seed", cfg.root_seed},
                               {"stream_index", stream},
                               {"x_max", xm},
                               {"count", c.count()},
                               {"lengths", c.lengths}};
            out << doc.dump(2) << '\n';
        } else {
            write_length_file(out, c);
        }
    };
    if (g.out_dir.empty()) {
        emit(std::cout);
    } else {
        const std::string name = "sample_seed" + std::to_string(cfg.root_seed) + "_stream" +
                                 std::to_string(stream) + (g.format == "json" ? ".json" : ".txt");
        auto out = open_output(fs::path(g.out_dir) / name);
        emit(out);
        std::cout << (fs::path(g.out_dir) / name).string() << '\n';
    }
    return kOk;
}

int cmd_variance(const GlobalOptions& g, const std::string& lengths_path, double L, double T,
                 std::uint64_t stream) {
    const ExperimentConfig cfg = resolve_config(g);
    const TestFunction tf = cfg.fhat.build();
    const WeightFunction wf = cfg.weight();
    if (!(L > 0.0) || !(T > 0.0)) {
        throw ConfigError("variance: --L and --T must be > 0");
    }
    const LengthConfiguration c = lengths_path.empty()
                                      ? draw(cfg, tf.support_radius() * L, stream)
                                      : read_length_file(lengths_path);
    const MarkSet marks = build_marks(c, tf, L, cfg.max_marks);
    const VarianceDecomposition d = phi(marks, wf, T);
    const double target = tf.sigma2_goe();
    if (g.format == "json") {
        nlohmann::json doc{{"source", lengths_path.empty() ? "sampled" : lengths_path},
                           {"L", L},
                           {"T", T},
                           {"point_count", c.count()},
                           {"mark_count", marks.size()},
                           {"pairs", d.pairs_evaluated},
                           {"v_total", d.total},
                           {"diag11", d.diag11},
                           {"diag_tail", d.diag_tail},
                           {"offdiag", d.offdiag},
                           {"sigma2_target", target},
                           {"abs_dev", std::abs(d.total - target)}};
        std::cout << doc.dump(2) << '\n';
    } else {
        ResultRecord rec;
        rec.experiment_id = lengths_path.empty() ? "variance-sampled" : "variance-ingested";
        rec.L = L;
        rec.T = T;
        rec.replicate = lengths_path.empty() ? stream : 0;
        rec.point_count = c.count();
        rec.mark_count = marks.size();
        rec.pairs = d.pairs_evaluated;
        rec.phi = d;
        rec.abs_dev = std::abs(d.total - target);
        write_records_csv_header(std::cout);
        write_record_csv(std::cout, rec);
    }
    return kOk;
}

int cmd_ingest(const GlobalOptions& g, const std::string& lengths_path,
               const std::string& eigen_path) {
    if (lengths_path.empty() == eigen_path.empty()) {
        throw ConfigError("ingest: give exactly one of --lengths or --eigenvalues");
    }
    const bool lengths = !lengths_path.empty();
    const std::string& path = lengths ? lengths_path : eigen_path;
    std::ostringstream normalized;
    nlohmann::json doc{{"path", path}};
    if (lengths) {
        const LengthConfiguration c = read_length_file(path);
        write_length_file(normalized, c);
        doc["kind"] = "lengths";
        doc["count"] = c.count();
        if (const auto* src = std::get_if<IngestedSource>(&c.source); src && src->genus) {
            doc["genus"] = *src->genus;
        }
        doc["values"] = c.lengths;
    } else {
        const EigenvalueList ev = read_eigenvalue_file(path);
        normalized << "# genus=" << ev.genus << "\n# count=" << ev.r_values.size() << '\n';
        for (double r : ev.r_values) {
            normalized << format_real(r) << '\n';
        }
        doc["kind"] = "eigenvalues";
        doc["count"] = ev.r_values.size();
        doc["genus"] = ev.genus;
        doc["values"] = ev.r_values;
    }
    if (!g.out_dir.empty()) {
        const fs::path target =
            fs::path(g.out_dir) / (fs::path(path).stem().string() + ".normalized.txt");
        auto out = open_output(target);
        out << normalized.str();
        std::cerr << "wrote " << target.string() << '\n';
    }
    if (g.format == "json") {
        std::cout << doc.dump(2) << '\n';
    } else {
        std::cout << normalized.str();
    }
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Poisson length-spectrum model: energy variance of smoothed counting statistics"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOptions g;
    app.add_option("--config", g.config_path, "experiment config file (key = value lines)")
        ->check(CLI::ExistingFile);
    app.add_option("--seed", g.seed, "root seed (overrides the config)");
    app.add_option("--threads", g.threads, "worker threads, 0 = all cores")
        ->check(CLI::NonNegativeNumber);
    app.add_option("--out", g.out_dir, "output directory");
    app.add_option("--format", g.format, "output format")->check(CLI::IsMember({"csv", "json"}));

    int code = kOk;

    auto* oracle = app.add_subcommand("oracle", "run the quadrature-oracle checks A1-A5");
    double sigma2_offset = 0.0;
    bool no_mc = false;
    int mc_replicates = 2000;
    oracle->add_option("--sigma2-offset", sigma2_offset, "shift the GOE target (negative control)");
    oracle->add_flag("--no-mc", no_mc, "skip the Monte Carlo halves of A2 and A4");
    oracle->add_option("--mc-replicates", mc_replicates, "Monte Carlo replicates")
        ->check(CLI::PositiveNumber);
    oracle->callback([&] { code = cmd_oracle(g, sigma2_offset, no_mc, mc_replicates); });

    auto* experiment = app.add_subcommand("experiment", "run the convergence schedule");
    std::optional<int> replicates;
    experiment->add_option("--replicates", replicates, "replicates per row (overrides config)")
        ->check(CLI::PositiveNumber);
    experiment->callback([&] { code = cmd_experiment(g, replicates); });

    auto* sample_cmd = app.add_subcommand("sample", "draw one length configuration");
    std::optional<double> x_max;
    std::optional<double> L_sample;
    std::uint64_t stream = 0;
    sample_cmd->add_option("--x-max", x_max, "truncation point")->check(CLI::PositiveNumber);
    sample_cmd->add_option("--L", L_sample, "window length; x_max = C0 L")
        ->check(CLI::PositiveNumber);
    sample_cmd->add_option("--stream", stream, "stream index");
    sample_cmd->callback([&] { code = cmd_sample(g, x_max, L_sample, stream); });

    auto* variance = app.add_subcommand("variance", "evaluate phi on one spectrum");
    std::string var_lengths;
    double var_L = 0.0;
    double var_T = 0.0;
    std::uint64_t var_stream = 0;
    variance->add_option("--lengths", var_lengths, "length file; sampled when omitted")
        ->check(CLI::ExistingFile);
    variance->add_option("--L", var_L, "window length")->required();
    variance->add_option("--T", var_T, "energy scale")->required();
    variance->add_option("--stream", var_stream, "stream index for a sampled spectrum");
    variance->callback([&] { code = cmd_variance(g, var_lengths, var_L, var_T, var_stream); });

    auto* ingest = app.add_subcommand("ingest", "validate and normalize a spectrum file");
    std::string ingest_lengths;
    std::string ingest_eigen;
    ingest->add_option("--lengths", ingest_lengths, "length spectrum file");
    ingest->add_option("--eigenvalues", ingest_eigen, "eigenvalue (r_j) file");
    ingest->callback([&] { code = cmd_ingest(g, ingest_lengths, ingest_eigen); });

    for (auto* sub : {oracle, experiment, sample_cmd, variance, ingest}) {
        sub->fallthrough();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfigError;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const ParseError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kConfigError;
    } catch (const BudgetError& e) {
        std::cerr << "budget refusal: " << e.what() << " (expected " << e.expected_count()
                  << ")\n";
        return kBudgetRefusal;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid argument: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFailure;
    }
    return code;
}
