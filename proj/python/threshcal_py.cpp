#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "threshcal/calibration.hpp"
#include "threshcal/classifiers.hpp"
#include "threshcal/data_io.hpp"
#include "threshcal/error.hpp"
#include "threshcal/experiments.hpp"
#include "threshcal/selection.hpp"

namespace py = pybind11;
using namespace threshcal;

namespace {

MethodConfig method_for(const std::string& label, std::size_t n) {
    MethodDefaults d;
    d.n = n;
    return parse_method(label, d);
}

py::dict metrics_dict(const Metrics& m) {
    py::dict d;
    d["accuracy"] = m.accuracy;
    d["f1"] = m.f1;
    d["tp"] = m.tp;
    d["fp"] = m.fp;
    d["tn"] = m.tn;
    d["fn"] = m.fn;
    return d;
}

std::vector<LabeledPoint> hard_points(const std::vector<double>& scores, const std::vector<bool>& labels) {
    if (scores.size() != labels.size()) {
        throw InputError("scores and labels differ in length");
    }
    std::vector<LabeledPoint> pts;
    pts.reserve(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        pts.push_back(LabeledPoint::gold(scores[i], labels[i]));
    }
    return pts;
}

}  // namespace

PYBIND11_MODULE(_threshcal, m) {
    m.doc() = "Decision-threshold calibration for scored knowledge-graph triples.";

    auto base = py::register_exception<Error>(m, "Error");
    py::register_exception<InputError>(m, "InputError", base.ptr());
    py::register_exception<ParseError>(m, "ParseError", base.ptr());
    py::register_exception<IoError>(m, "IoError", base.ptr());
    py::register_exception<DegenerateLabels>(m, "DegenerateLabels", base.ptr());
    py::register_exception<ConvergenceError>(m, "ConvergenceError", base.ptr());
    py::register_exception<NumericalError>(m, "NumericalError", base.ptr());

    py::class_<ScoredTriple>(m, "ScoredTriple")
        .def(py::init([](std::string h, std::string r, std::string t, double s, std::optional<bool> label) {
                 return ScoredTriple{std::move(h), std::move(r), std::move(t), s, label};
             }),
             py::arg("head"), py::arg("relation"), py::arg("tail"), py::arg("score"), py::arg("label") = py::none())
        .def_readonly("head", &ScoredTriple::head)
        .def_readonly("relation", &ScoredTriple::relation)
        .def_readonly("tail", &ScoredTriple::tail)
        .def_readonly("score", &ScoredTriple::score)
        .def_readonly("label", &ScoredTriple::oracle_label)
        .def("__repr__", [](const ScoredTriple& t) {
            return "ScoredTriple(" + t.head + ", " + t.relation + ", " + t.tail + ", " + format_real(t.score) + ")";
        });

    py::class_<Dataset>(m, "Dataset")
        .def(py::init<std::vector<ScoredTriple>>(), py::arg("triples"))
        .def("__len__", &Dataset::size)
        .def("__getitem__",
             [](const Dataset& d, std::size_t i) {
                 if (i >= d.size()) throw py::index_error();
                 return d[i];
             })
        .def_property_readonly("relations", [](const Dataset& d) {
            return std::vector<RelationId>(d.relations().begin(), d.relations().end());
        })
        .def_property_readonly("scores", &Dataset::scores)
        .def_property_readonly("triples", &Dataset::triples)
        .def("fully_labeled", &Dataset::fully_labeled)
        .def("save", [](const Dataset& d, const std::filesystem::path& path) { save_scored_triples(path, d); })
        .def("to_tsv", [](const Dataset& d) {
            std::ostringstream out;
            write_scored_triples(out, d);
            return out.str();
        });

    m.def("load_dataset", &load_scored_triples, py::arg("path"));
    m.def(
        "parse_dataset",
        [](const std::string& text) {
            std::istringstream in(text);
            return parse_scored_triples(in, "<string>");
        },
        py::arg("text"));

    m.def(
        "synthetic",
        [](std::size_t relations, std::size_t n_pos, std::size_t n_neg, double mu_pos, double mu_neg, double sigma,
           std::uint64_t seed) {
            SyntheticSpec spec;
            spec.seed = seed;
            spec.per_relation.assign(relations, RelationSpec{n_pos, n_neg, mu_pos, mu_neg, sigma});
            auto data = generate_synthetic(spec);
            return py::make_tuple(std::move(data.dataset), data.bayes.thresholds, data.bayes.accuracies);
        },
        py::arg("relations") = 42, py::arg("n_pos") = 50, py::arg("n_neg") = 50, py::arg("mu_pos") = 2.0,
        py::arg("mu_neg") = -2.0, py::arg("sigma") = 1.0, py::arg("seed") = 12345,
        "Dataset plus per-relation Bayes thresholds and accuracies.");

    py::class_<ThresholdMap>(m, "ThresholdMap")
        .def(py::init<>())
        .def_readwrite("per_relation", &ThresholdMap::per_relation)
        .def_readwrite("default", &ThresholdMap::default_threshold)
        .def("__getitem__", &ThresholdMap::lookup)
        .def("__eq__", [](const ThresholdMap& a, const ThresholdMap& b) { return a == b; })
        .def("save", [](const ThresholdMap& t, const std::filesystem::path& path) { save_threshold_file(path, t); })
        .def("to_text", [](const ThresholdMap& t) {
            std::ostringstream out;
            write_threshold_file(out, t);
            return out.str();
        });
    m.def("load_thresholds", &load_threshold_file, py::arg("path"));

    m.def(
        "calibrate",
        [](const Dataset& data, const std::string& method, std::optional<std::size_t> budget, std::size_t n,
           std::uint64_t seed) {
            return calibrate_method(data, method_for(method, n), budget.value_or(data.size()), seed).thresholds;
        },
        py::arg("data"), py::arg("method") = "actc-lr-rndm", py::arg("budget") = py::none(), py::arg("n") = 500,
        py::arg("seed") = 12345,
        "Thresholds from a labeled calibration set. `method` is a sweep label such as "
        "'actc-lr-dens', 'local-acc' or 'global-f1'.");

    m.def(
        "evaluate",
        [](const ThresholdMap& thresholds, const Dataset& test) {
            return metrics_dict(evaluate_thresholds(thresholds, test));
        },
        py::arg("thresholds"), py::arg("test"));

    m.def(
        "run_trial",
        [](const Dataset& calib, const Dataset& test, const std::string& method, std::size_t budget, std::size_t n,
           std::uint64_t seed) { return metrics_dict(run_trial(calib, test, method_for(method, n), budget, seed).metrics); },
        py::arg("calib"), py::arg("test"), py::arg("method"), py::arg("budget"), py::arg("n") = 500,
        py::arg("seed") = 12345);

    m.def(
        "sweep",
        [](const Dataset& calib, const Dataset& test, const std::vector<std::string>& methods,
           std::vector<std::size_t> budgets, std::size_t repeats, std::size_t n, std::uint64_t master_seed,
           std::size_t threads) {
            SweepConfig cfg;
            for (const auto& label : methods) cfg.methods.push_back(method_for(label, n));
            cfg.budgets = std::move(budgets);
            cfg.repeats = repeats;
            cfg.master_seed = master_seed;
            cfg.threads = threads;
            SweepReport report;
            {
                py::gil_scoped_release release;
                report = run_sweep(cfg, calib, test);
            }
            std::ostringstream out;
            write_report_csv(out, report);
            return out.str();
        },
        py::arg("calib"), py::arg("test"), py::arg("methods"),
        py::arg("budgets") = std::vector<std::size_t>{1, 2, 5, 10, 20, 50, 100, 200, 500, 1000},
        py::arg("repeats") = 100, py::arg("n") = 500, py::arg("master_seed") = 12345, py::arg("threads") = 0,
        "Budget sweep; returns the report as CSV text.");

    m.def("density_scores", [](const std::vector<double>& s) { return density_scores(s); }, py::arg("scores"));
    m.def(
        "select",
        [](const std::vector<double>& scores, std::size_t budget, const std::string& strategy, std::uint64_t seed) {
            SelectionStrategy st;
            st.kind = parse_selection_kind(strategy);
            st.seed = seed;
            return select(st, scores, budget);
        },
        py::arg("scores"), py::arg("budget"), py::arg("strategy") = "random", py::arg("seed") = 0);

    m.def(
        "estimate_threshold",
        [](const std::vector<double>& scores, const std::vector<bool>& labels, const std::string& metric) {
            if (metric != "acc" && metric != "f1") throw InputError("metric must be 'acc' or 'f1'");
            DecisionSet set{std::nullopt, hard_points(scores, labels)};
            const auto e = estimate_threshold(set, metric == "f1" ? Metric::F1 : Metric::Accuracy);
            return py::make_tuple(e.threshold, e.value);
        },
        py::arg("scores"), py::arg("labels"), py::arg("metric") = "acc",
        "(threshold, metric value) of the smallest maximizing threshold.");

    py::class_<ProbClassifier>(m, "Classifier")
        .def("predict", &ProbClassifier::predict, py::arg("score"))
        .def("predict_many", [](const ProbClassifier& c, const std::vector<double>& s) {
            std::vector<double> out;
            out.reserve(s.size());
            for (double x : s) out.push_back(c.predict(x));
            return out;
        });
    m.def(
        "fit_classifier",
        [](const std::vector<double>& scores, const std::vector<bool>& labels, const std::string& kind,
           const std::string& kernel, std::optional<double> length_scale, double nu, double inv_reg_c) {
            ClassifierConfig cfg;
            if (kind != "lr" && kind != "gp") throw InputError("kind must be 'lr' or 'gp'");
            cfg.kind = kind == "gp" ? ClassifierKind::GP : ClassifierKind::LR;
            cfg.inv_reg_c = inv_reg_c;
            cfg.kernel.kind = parse_kernel_kind(kernel);
            cfg.kernel.length_scale = length_scale.value_or(cfg.kernel.kind == KernelKind::RBF ? 10.0 : 0.1);
            cfg.kernel.nu = nu;
            return fit_classifier(cfg, scores, labels);
        },
        py::arg("scores"), py::arg("labels"), py::arg("kind") = "lr", py::arg("kernel") = "matern",
        py::arg("length_scale") = py::none(), py::arg("nu") = 1.5, py::arg("inv_reg_c") = 100.0);
}
