#include "hypvar/errors.hpp"
#include "hypvar/harness.hpp"
#include "hypvar/oracle_suite.hpp"
#include "hypvar/point_process.hpp"
#include "hypvar/random.hpp"
#include "hypvar/spectral.hpp"
#include "hypvar/test_functions.hpp"
#include "hypvar/variance.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace hypvar;

namespace {

py::dict record_dict(const ResultRecord& r) {
    py::dict d;
    d["experiment_id"] = r.experiment_id;
    d["L"] = r.L;
    d["T"] = r.T;
    d["replicate"] = r.replicate;
    d["point_count"] = r.point_count;
    d["mark_count"] = r.mark_count;
    d["pairs"] = r.pairs;
    d["v_total"] = r.phi.total;
    d["diag11"] = r.phi.diag11;
    d["diag_tail"] = r.phi.diag_tail;
    d["offdiag"] = r.phi.offdiag;
    d["abs_dev"] = r.abs_dev;
    d["status"] = std::string(to_string(r.status));
    d["message"] = r.message;
    d["wall_time_ms"] = r.wall_time_ms;
    return d;
}

py::dict summary_dict(const SummaryRow& s) {
    py::dict d;
    d["L"] = s.L;
    d["T"] = s.T;
    d["replicates"] = s.replicates;
    d["completed"] = s.completed;
    d["mean_abs_dev"] = s.mean_abs_dev;
    d["std_err"] = s.std_err;
    d["prob_dev_gt_eps"] = s.prob_dev_gt_eps;
    d["epsilon"] = s.epsilon;
    d["mean_v_total"] = s.mean_v_total;
    d["mean_diag11"] = s.mean_diag11;
    d["mean_abs_offdiag"] = s.mean_abs_offdiag;
    d["sigma2_target"] = s.sigma2_target;
    d["oracle_diag11"] = s.oracle_diag11;
    d["oracle_offdiag_abs"] = s.oracle_offdiag_abs;
    d["oracle_k_tail"] = s.oracle_k_tail;
    d["markov_consistent"] = s.markov_consistent;
    d["status"] = s.status;
    d["note"] = s.note;
    return d;
}

// Elementwise fn over a float array, or a float for a scalar input.
template <class Fn>
py::object map_array(const py::object& x, Fn fn) {
    if (py::isinstance<py::float_>(x) || py::isinstance<py::int_>(x)) {
        return py::float_(fn(x.cast<double>()));
    }
    auto in = py::array_t<double, py::array::c_style | py::array::forcecast>::ensure(x);
    if (!in) {
        throw py::type_error("expected a float or an array of floats");
    }
    py::array_t<double> out(std::vector<py::ssize_t>(in.shape(), in.shape() + in.ndim()));
    const double* src = in.data();
    double* dst = out.mutable_data();
    for (py::ssize_t i = 0; i < in.size(); ++i) {
        dst[i] = fn(src[i]);
    }
    return out;
}

ExperimentConfig config_from_text(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in, "<string>");
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Energy variance of smoothed length-spectrum statistics under a Poisson model";

    py::register_exception<BudgetError>(m, "BudgetError");
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<TailBoundError>(m, "TailBoundError");

    py::class_<TestFunction>(m, "TestFunction")
        .def_property_readonly("power", &TestFunction::power)
        .def_property_readonly("support_radius", &TestFunction::support_radius)
        .def_property_readonly("effective_support", &TestFunction::effective_support)
        .def_property_readonly("sigma2_goe", &TestFunction::sigma2_goe)
        .def("fhat",
             [](const TestFunction& t, const py::object& x) {
                 return map_array(x, [&](double v) { return t.fhat(v); });
             })
        .def("f",
             [](const TestFunction& t, const py::object& x) {
                 return map_array(x, [&](double v) { return t.f(v); });
             })
        .def("__repr__", &TestFunction::describe);
    m.def("make_polynomial_testfn", &make_polynomial_testfn, py::arg("power") = 2,
          py::arg("radius") = 1.0);
    m.def("make_zero_testfn", &make_zero_testfn, py::arg("radius") = 1.0);
    m.def("sigma2_goe", [](const TestFunction& tf) { return sigma2_goe(tf); });

    py::class_<WeightFunction>(m, "WeightFunction")
        .def_property_readonly("family",
                               [](const WeightFunction& w) {
                                   return std::string(to_string(w.family()));
                               })
        .def("omega",
             [](const WeightFunction& w, const py::object& x) {
                 return map_array(x, [&](double v) { return w.omega(v); });
             })
        .def("omegahat",
             [](const WeightFunction& w, const py::object& x) {
                 return map_array(x, [&](double v) { return w.omegahat(v); });
             })
        .def("tail_mass_bound", &WeightFunction::tail_mass_bound);
    m.def("make_weight", [](const std::string& family) { return make_weight(family); },
          py::arg("family") = "bspline4");

    m.def("intensity_density",
          [](const py::object& x) { return map_array(x, &IntensityMeasure::density); });
    m.def("intensity_mass", [](double x_max) { return intensity_mass(x_max); });
    m.def(
        "sample",
        [](double x_max, std::uint64_t seed, std::uint64_t stream, double max_expected_points) {
            SamplerBudget budget;
            budget.max_expected_points = max_expected_points;
            const IntensityMeasure measure(x_max);
            RngStream rng(seed, stream);
            return sample(measure, rng, budget).lengths;
        },
        py::arg("x_max"), py::arg("seed") = 1, py::arg("stream") = 0,
        py::arg("max_expected_points") = SamplerBudget{}.max_expected_points,
        "Sorted lengths of one Poisson draw on (0, x_max].");

    m.def("kernel_HL", [](const py::object& x, const TestFunction& tf, double L) {
              return map_array(x, [&](double v) { return kernel_HL(v, tf, L); });
          },
          py::arg("x"), py::arg("tf"), py::arg("L"));
    m.def("kernel_UT", [](double x, double y, const WeightFunction& wf, double T) {
              return kernel_UT(x, y, wf, T);
          },
          py::arg("x"), py::arg("y"), py::arg("wf"), py::arg("T"));

    m.def(
        "marks",
        [](const std::vector<double>& lengths, const TestFunction& tf, double L) {
            const auto set = build_marks(LengthConfiguration::from_lengths(lengths), tf, L);
            py::list out;
            for (const auto& mk : set.marks) {
                out.append(py::make_tuple(mk.m, mk.k, mk.point_id, mk.weight));
            }
            return out;
        },
        py::arg("lengths"), py::arg("tf"), py::arg("L"),
        "Sorted (m, k, point_id, weight) tuples.");
    m.def(
        "phi",
        [](const std::vector<double>& lengths, const TestFunction& tf, const WeightFunction& wf,
           double L, double T) {
            const auto marks = build_marks(LengthConfiguration::from_lengths(lengths), tf, L);
            const auto d = phi(marks, wf, T);
            py::dict out;
            out["total"] = d.total;
            out["diag11"] = d.diag11;
            out["diag_tail"] = d.diag_tail;
            out["offdiag"] = d.offdiag;
            out["pairs"] = d.pairs_evaluated;
            return out;
        },
        py::arg("lengths"), py::arg("tf"), py::arg("wf"), py::arg("L"), py::arg("T"));
    m.def(
        "energy_variance_direct",
        [](const std::vector<double>& lengths, const TestFunction& tf, const WeightFunction& wf,
           double L, double T) {
            return energy_variance_direct(LengthConfiguration::from_lengths(lengths), tf, wf, L, T);
        },
        py::arg("lengths"), py::arg("tf"), py::arg("wf"), py::arg("L"), py::arg("T"));

    m.def("diag11_mean_oracle",
          [](const TestFunction& tf, const WeightFunction& wf, double L, double T) {
              return diag11_mean_oracle(tf, wf, L, T);
          });
    m.def("diag11_secondmoment_oracles",
          [](const TestFunction& tf, const WeightFunction& wf, double L, double T) {
              return diag11_secondmoment_oracles(tf, wf, L, T);
          });
    m.def(
        "offdiag_abs_oracle",
        [](const TestFunction& tf, const WeightFunction& wf, double L, double T, int k_max) {
            return offdiag_abs_oracle(tf, wf, L, T, k_max);
        },
        py::arg("tf"), py::arg("wf"), py::arg("L"), py::arg("T"), py::arg("k_max") = 6);
    m.def("d_term", [](int k1, int k2, const TestFunction& tf, const WeightFunction& wf, double L,
                       double T) { return d_term(k1, k2, tf, wf, L, T); });
    m.def(
        "d_term_sum",
        [](const TestFunction& tf, const WeightFunction& wf, double L, double T, int max_sum) {
            return d_term_sum(max_sum, tf, wf, L, T);
        },
        py::arg("tf"), py::arg("wf"), py::arg("L"), py::arg("T"), py::arg("max_sum") = 12);

    py::class_<ExperimentConfig>(m, "ExperimentConfig")
        .def_readwrite("experiment_id", &ExperimentConfig::experiment_id)
        .def_readwrite("root_seed", &ExperimentConfig::root_seed)
        .def_readwrite("threads", &ExperimentConfig::threads)
        .def_readwrite("epsilon", &ExperimentConfig::epsilon)
        .def_readwrite("replicates", &ExperimentConfig::replicates)
        .def_readwrite("attach_oracles", &ExperimentConfig::attach_oracles)
        .def_property(
            "schedule",
            [](const ExperimentConfig& c) {
                py::list out;
                for (const auto& e : c.schedule) {
                    out.append(py::make_tuple(e.L, e.T));
                }
                return out;
            },
            [](ExperimentConfig& c, const std::vector<std::pair<double, double>>& rows) {
                c.schedule.clear();
                for (const auto& [L, T] : rows) {
                    c.schedule.push_back({L, T, std::nullopt});
                }
            })
        .def("validate", &ExperimentConfig::validate);
    m.def("default_experiment_config", &default_experiment_config);
    m.def("load_config", &load_config, py::arg("path"));
    m.def("parse_config", &config_from_text, py::arg("text"));

    m.def(
        "run_replicate",
        [](const ExperimentConfig& cfg, double L, double T, std::uint64_t replicate) {
            return record_dict(run_replicate(cfg, L, T, replicate));
        },
        py::arg("cfg"), py::arg("L"), py::arg("T"), py::arg("replicate"));
    m.def(
        "run_schedule",
        [](const ExperimentConfig& cfg) {
            ScheduleResult res;
            {
                py::gil_scoped_release release;
                res = run_schedule(cfg);
            }
            py::list records;
            for (const auto& r : res.records) {
                records.append(record_dict(r));
            }
            py::list summary;
            for (const auto& s : res.summary) {
                summary.append(summary_dict(s));
            }
            return py::make_tuple(records, summary);
        },
        py::arg("cfg"), "(records, summary) as lists of dicts.");
    m.def(
        "run_oracle_suite",
        [](const ExperimentConfig& cfg, bool monte_carlo, double sigma2_offset) {
            OracleSuiteOptions opts;
            opts.monte_carlo = monte_carlo;
            opts.sigma2_offset = sigma2_offset;
            OracleReport report;
            {
                py::gil_scoped_release release;
                report = run_oracle_suite(cfg, opts);
            }
            py::list out;
            for (const auto& c : report.checks) {
                py::dict d;
                d["id"] = c.id;
                d["title"] = c.title;
                d["passed"] = c.passed;
                d["measured"] = c.measured;
                d["detail"] = c.detail;
                out.append(d);
            }
            return out;
        },
        py::arg("cfg"), py::arg("monte_carlo") = false, py::arg("sigma2_offset") = 0.0);

    m.attr("RECORD_CSV_HEADER") = kRecordCsvHeader;
}
