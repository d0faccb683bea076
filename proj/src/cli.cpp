#include "threshcal/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>

#include "threshcal/calibration.hpp"
#include "threshcal/data_io.hpp"
#include "threshcal/error.hpp"
#include "threshcal/experiments.hpp"

namespace threshcal {

namespace {

struct CalibrateArgs {
    std::string input;
    std::string out;
    std::string method = "actc";
    std::string select = "random";
    std::string density_order = "max";
    std::optional<std::size_t> budget;
    std::size_t n = 500;
    std::string scope = "relation";
    std::string metric = "acc";
    std::string auto_extent = "topup";
    std::size_t grid_steps = 101;
    std::uint64_t seed = 12345;
    std::string classifier = "lr";
    std::string kernel = "matern";
    std::optional<double> length_scale;
    double nu = 1.5;
    double alpha = 1.0;
    std::string labels = "hard";
    double inv_reg_c = 100.0;
    bool strict_pseudocode = false;
};

struct EvaluateArgs {
    std::string thresholds;
    std::string test;
    std::string csv;
};

struct SweepArgs {
    std::string config;
    std::string calib;
    std::string test;
    std::string out;
    std::string format = "csv";
    std::size_t threads = 0;
    bool ablation = false;
};

struct SynthArgs {
    std::size_t relations = 42;
    std::size_t pos = 50;
    std::size_t neg = 50;
    std::optional<std::size_t> test_pos;
    std::optional<std::size_t> test_neg;
    double mu_pos = 2.0;
    double mu_neg = -2.0;
    double sigma = 1.0;
    double center_spread = 0.0;
    std::uint64_t seed = 12345;
    std::string calib_out;
    std::string test_out;
};

double default_length_scale(KernelKind kind) {
    return kind == KernelKind::RBF ? 10.0 : 0.1;
}

MethodConfig method_from_args(const CalibrateArgs& a) {
    MethodConfig m;
    m.label = a.method;
    m.grid_steps = a.grid_steps;
    m.scope = a.scope == "uniform" ? Scope::Uniform : Scope::PerRelation;
    if (a.method == "local-acc") {
        m.kind = MethodKind::LocalAcc;
        return m;
    }
    if (a.method == "local-f1") {
        m.kind = MethodKind::LocalF1;
        return m;
    }
    if (a.method == "global-f1") {
        m.kind = MethodKind::GlobalF1;
        return m;
    }
    m.kind = MethodKind::Actc;
    ActcConfig& c = m.actc;
    c.strategy.kind = parse_selection_kind(a.select);
    c.strategy.density_order = a.density_order == "min" ? DensityOrder::Min : DensityOrder::Max;
    c.min_set_size = a.n;
    c.scope = m.scope;
    c.metric = a.metric == "f1" ? Metric::F1 : Metric::Accuracy;
    c.auto_extent = a.auto_extent == "all" ? AutoExtent::All : AutoExtent::TopUp;
    c.label_mode = a.labels == "soft" ? LabelMode::Soft : LabelMode::Hard;
    c.strict_pseudocode = a.strict_pseudocode;
    c.classifier.kind = a.classifier == "gp" ? ClassifierKind::GP : ClassifierKind::LR;
    c.classifier.inv_reg_c = a.inv_reg_c;
    c.classifier.kernel.kind = parse_kernel_kind(a.kernel);
    c.classifier.kernel.length_scale = a.length_scale.value_or(default_length_scale(c.classifier.kernel.kind));
    c.classifier.kernel.nu = a.nu;
    c.classifier.kernel.alpha = a.alpha;
    return m;
}

int cmd_calibrate(const CalibrateArgs& a, std::ostream& out, std::ostream& err) {
    const Dataset data = load_scored_triples(a.input);
    const MethodConfig method = method_from_args(a);
    const std::size_t budget = a.budget.value_or(data.size());
    const auto result = calibrate_method(data, method, budget, a.seed);
    if (result.degraded_sets > 0) {
        err << "warning: " << result.degraded_sets << " decision set(s) smaller than n\n";
    }
    if (a.out.empty()) {
        write_threshold_file(out, result.thresholds);
    } else {
        save_threshold_file(a.out, result.thresholds);
    }
    return 0;
}

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
    const ThresholdMap thresholds = load_threshold_file(a.thresholds);
    const Dataset test = load_scored_triples(a.test);
    const Metrics m = evaluate_thresholds(thresholds, test);
    out << std::fixed << std::setprecision(1) << "Acc " << 100.0 * m.accuracy << " F1 " << 100.0 * m.f1 << '\n';
    if (!a.csv.empty()) {
        std::ofstream csv(a.csv);
        if (!csv) throw IoError("cannot write " + a.csv);
        csv << "acc,f1,tp,fp,tn,fn\n"
            << std::fixed << std::setprecision(6) << m.accuracy << ',' << m.f1 << ',' << m.tp << ',' << m.fp << ','
            << m.tn << ',' << m.fn << '\n';
    }
    return 0;
}

int cmd_sweep(const SweepArgs& a, std::ostream& out) {
    SweepConfig cfg = load_sweep_config(a.config);
    if (!a.calib.empty()) cfg.calibration_path = a.calib;
    if (!a.test.empty()) cfg.test_path = a.test;
    if (a.threads > 0) cfg.threads = a.threads;
    if (!cfg.calibration_path || !cfg.test_path) {
        throw InputError("sweep: calibration and test files are required (config keys or --calib/--test)");
    }
    const SweepReport report = a.ablation ? run_n_ablation(cfg, *cfg.calibration_path, *cfg.test_path)
                                          : run_sweep(cfg, *cfg.calibration_path, *cfg.test_path);
    std::ostringstream text;
    if (a.format == "md") {
        write_report_markdown(text, report);
    } else {
        write_report_csv(text, report);
    }
    if (a.out.empty()) {
        out << text.str();
    } else {
        std::ofstream file(a.out);
        if (!file) throw IoError("cannot write " + a.out);
        file << text.str();
    }
    return 0;
}

int cmd_synth(const SynthArgs& a, std::ostream& out) {
    if (a.relations == 0) throw InputError("synth: --relations must be positive");
    Rng centers(StableHash().add(a.seed).add("centers").digest());
    SyntheticSpec calib_spec;
    SyntheticSpec test_spec;
    calib_spec.seed = a.seed;
    test_spec.seed = StableHash().add(a.seed).add("test").digest();
    for (std::size_t r = 0; r < a.relations; ++r) {
        const double shift = a.center_spread > 0.0 ? a.center_spread * (2.0 * centers.uniform() - 1.0) : 0.0;
        RelationSpec rs{a.pos, a.neg, a.mu_pos + shift, a.mu_neg + shift, a.sigma};
        calib_spec.per_relation.push_back(rs);
        rs.n_pos = a.test_pos.value_or(a.pos);
        rs.n_neg = a.test_neg.value_or(a.neg);
        test_spec.per_relation.push_back(rs);
    }
    const auto calib = generate_synthetic(calib_spec);
    const auto test = generate_synthetic(test_spec);
    save_scored_triples(a.calib_out, calib.dataset);
    save_scored_triples(a.test_out, test.dataset);
    double bayes = 0.0;
    for (double acc : calib.bayes.accuracies) bayes += acc;
    out << "wrote " << calib.dataset.size() << " calibration and " << test.dataset.size() << " test triples over "
        << a.relations << " relations; Bayes accuracy " << std::fixed << std::setprecision(4)
        << bayes / static_cast<double>(a.relations) << '\n';
    return 0;
}

int cmd_inspect(const std::string& path, std::ostream& out) {
    const Dataset data = load_scored_triples(path);
    std::size_t pos = 0;
    std::size_t neg = 0;
    for (const auto& t : data.triples()) {
        if (t.oracle_label) (*t.oracle_label ? pos : neg)++;
    }
    const std::size_t g = std::gcd(pos, neg);
    out << "triples: " << data.size() << '\n'
        << "relations: " << data.relations().size() << '\n'
        << "labeled: " << pos + neg << '\n'
        << "unlabeled: " << data.size() - pos - neg << '\n'
        << "positive:negative: " << (g ? pos / g : 0) << ':' << (g ? neg / g : 0) << '\n';
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Decision-threshold calibration for scored knowledge-graph triples", "threshcal"};
    app.require_subcommand(1);

    CalibrateArgs cal;
    auto* calibrate = app.add_subcommand("calibrate", "Estimate thresholds from a labeled calibration file");
    calibrate->add_option("-i,--input", cal.input, "Scored-triple TSV; its labels act as the annotation oracle")
        ->required();
    calibrate->add_option("-o,--out", cal.out, "Threshold file to write (stdout when omitted)");
    calibrate->add_option("--method", cal.method, "Calibration method")
        ->check(CLI::IsMember({"actc", "local-acc", "local-f1", "global-f1"}))
        ->capture_default_str();
    calibrate->add_option("--select", cal.select, "ACTC selection strategy")
        ->check(CLI::IsMember({"random", "density", "uncertainty", "dwu"}))
        ->capture_default_str();
    calibrate->add_option("--density-order", cal.density_order, "Take the largest or smallest densities")
        ->check(CLI::IsMember({"max", "min"}))
        ->capture_default_str();
    calibrate->add_option("--budget", cal.budget, "Annotation budget (default: every triple)");
    calibrate->add_option("--n", cal.n, "Minimal decision-set size")->check(CLI::PositiveNumber)->capture_default_str();
    calibrate->add_option("--scope", cal.scope, "Per-relation or one uniform threshold")
        ->check(CLI::IsMember({"relation", "uniform"}))
        ->capture_default_str();
    calibrate->add_option("--metric", cal.metric, "Metric maximized by the ACTC threshold search")
        ->check(CLI::IsMember({"acc", "f1"}))
        ->capture_default_str();
    calibrate->add_option("--auto", cal.auto_extent, "Auto-label up to n points or the whole pool")
        ->check(CLI::IsMember({"topup", "all"}))
        ->capture_default_str();
    calibrate->add_option("--grid-steps", cal.grid_steps, "Grid size for global-f1")
        ->check(CLI::Range(std::size_t{2}, std::size_t{1000000}))
        ->capture_default_str();
    calibrate->add_option("--seed", cal.seed, "Random seed")->capture_default_str();
    calibrate->add_option("--classifier", cal.classifier, "Auto-labeling classifier")
        ->check(CLI::IsMember({"lr", "gp"}))
        ->capture_default_str();
    calibrate->add_option("--kernel", cal.kernel, "GP kernel")
        ->check(CLI::IsMember({"rbf", "matern", "rq"}))
        ->capture_default_str();
    calibrate->add_option("--length-scale", cal.length_scale, "Kernel length scale (default 10 for rbf, 0.1 otherwise)")
        ->check(CLI::PositiveNumber);
    calibrate->add_option("--nu", cal.nu, "Matern smoothness")->check(CLI::PositiveNumber)->capture_default_str();
    calibrate->add_option("--alpha", cal.alpha, "RationalQuadratic mixture parameter")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    calibrate->add_option("--labels", cal.labels, "Hard or soft automatic labels")
        ->check(CLI::IsMember({"hard", "soft"}))
        ->capture_default_str();
    calibrate->add_option("--inv-reg-c", cal.inv_reg_c, "Inverse L2 regularization strength of LR")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    calibrate->add_flag("--strict-pseudocode", cal.strict_pseudocode,
                        "Search thresholds over gold annotations only");

    EvaluateArgs ev;
    auto* evaluate = app.add_subcommand("evaluate", "Score a threshold file on a labeled test file");
    evaluate->add_option("-t,--thresholds", ev.thresholds, "Threshold file")->required();
    evaluate->add_option("--test", ev.test, "Labeled scored-triple TSV")->required();
    evaluate->add_option("--csv", ev.csv, "Also write the metrics as a CSV row to this file");

    SweepArgs sw;
    auto* sweep = app.add_subcommand("sweep", "Run a budget sweep described by a config file");
    sweep->add_option("-c,--config", sw.config, "key = value sweep configuration")->required();
    sweep->add_option("--calib", sw.calib, "Calibration file (overrides the config)");
    sweep->add_option("--test", sw.test, "Test file (overrides the config)");
    sweep->add_option("-o,--out", sw.out, "Report file (stdout when omitted)");
    sweep->add_option("--format", sw.format, "Report format")
        ->check(CLI::IsMember({"csv", "md"}))
        ->capture_default_str();
    sweep->add_option("--threads", sw.threads, "Worker threads (default THRESHCAL_THREADS or all cores)");
    sweep->add_flag("--ablation", sw.ablation, "Sweep the config's n_values with the ACTC methods");

    SynthArgs sy;
    auto* synth = app.add_subcommand("synth", "Write a synthetic calibration/test TSV pair");
    synth->add_option("--relations", sy.relations, "Number of relations")->capture_default_str();
    synth->add_option("--pos", sy.pos, "Positives per relation (calibration)")->capture_default_str();
    synth->add_option("--neg", sy.neg, "Negatives per relation (calibration)")->capture_default_str();
    synth->add_option("--test-pos", sy.test_pos, "Positives per relation (test; default --pos)");
    synth->add_option("--test-neg", sy.test_neg, "Negatives per relation (test; default --neg)");
    synth->add_option("--mu-pos", sy.mu_pos, "Mean score of positives")->capture_default_str();
    synth->add_option("--mu-neg", sy.mu_neg, "Mean score of negatives")->capture_default_str();
    synth->add_option("--sigma", sy.sigma, "Score standard deviation")->check(CLI::PositiveNumber)->capture_default_str();
    synth->add_option("--center-spread", sy.center_spread,
                      "Shift each relation's means by a uniform draw from [-R, R]")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    synth->add_option("--seed", sy.seed, "Generator seed")->capture_default_str();
    synth->add_option("--calib-out", sy.calib_out, "Calibration TSV to write")->required();
    synth->add_option("--test-out", sy.test_out, "Test TSV to write")->required();

    std::string inspect_path;
    auto* inspect = app.add_subcommand("inspect", "Print dataset statistics");
    inspect->add_option("file", inspect_path, "Scored-triple TSV")->required();

    std::vector<std::string> argv_storage;
    argv_storage.reserve(args.size() + 1);
    argv_storage.emplace_back("threshcal");
    argv_storage.insert(argv_storage.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& s : argv_storage) argv.push_back(s.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return 2;
    }

    try {
        if (*calibrate) return cmd_calibrate(cal, out, err);
        if (*evaluate) return cmd_evaluate(ev, out);
        if (*sweep) return cmd_sweep(sw, out);
        if (*synth) return cmd_synth(sy, out);
        if (*inspect) return cmd_inspect(inspect_path, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

}  // namespace threshcal
