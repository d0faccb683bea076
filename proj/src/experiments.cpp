#include "threshcal/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "threshcal/data_io.hpp"
#include "threshcal/error.hpp"

namespace threshcal {

namespace {

std::vector<std::string_view> split(std::string_view text, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = text.find(sep, start);
        parts.push_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

std::string_view trim(std::string_view s) {
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

}  // namespace

MethodConfig parse_method(std::string_view label, const MethodDefaults& defaults) {
    MethodConfig m;
    m.label = std::string(label);
    m.grid_steps = defaults.grid_steps;
    const auto bad = [&]() { return InputError("unknown method '" + std::string(label) + "'"); };
    const auto parts = split(label, '-');

    if (parts.size() >= 2 && parts[0] == "local") {
        if (parts[1] == "acc") {
            m.kind = MethodKind::LocalAcc;
        } else if (parts[1] == "f1") {
            m.kind = MethodKind::LocalF1;
        } else {
            throw bad();
        }
        if (parts.size() == 3 && parts[2] == "uni") {
            m.scope = Scope::Uniform;
        } else if (parts.size() != 2) {
            throw bad();
        }
        return m;
    }
    if (label == "global-f1") {
        m.kind = MethodKind::GlobalF1;
        return m;
    }
    if (parts.size() < 3 || parts[0] != "actc") {
        throw bad();
    }
    m.kind = MethodKind::Actc;
    ActcConfig& a = m.actc;
    a.min_set_size = defaults.n;
    a.classifier = defaults.classifier;
    a.label_mode = defaults.label_mode;
    a.auto_extent = defaults.auto_extent;
    a.strict_pseudocode = defaults.strict_pseudocode;
    a.strategy.density_order = defaults.density_order;
    if (parts[1] == "lr") {
        a.classifier.kind = ClassifierKind::LR;
    } else if (parts[1] == "gp") {
        a.classifier.kind = ClassifierKind::GP;
    } else {
        throw bad();
    }
    try {
        a.strategy.kind = parse_selection_kind(parts[2]);
    } catch (const InputError&) {
        throw bad();
    }
    for (std::size_t i = 3; i < parts.size(); ++i) {
        if (parts[i] == "uni") {
            a.scope = Scope::Uniform;
        } else if (parts[i] == "f1") {
            a.metric = Metric::F1;
        } else if (parts[i] == "soft") {
            a.label_mode = LabelMode::Soft;
        } else if (parts[i] == "hard") {
            a.label_mode = LabelMode::Hard;
        } else if (parts[i] == "all") {
            a.auto_extent = AutoExtent::All;
        } else {
            throw bad();
        }
    }
    return m;
}

CalibrationResult calibrate_method(const Dataset& calibration, const MethodConfig& method, std::size_t budget,
                                   std::uint64_t seed) {
    if (method.kind == MethodKind::Actc) {
        ActcConfig cfg = method.actc;
        cfg.budget = budget;
        cfg.seed = seed;
        return calibrate_actc(calibration, cfg);
    }

    // Baselines annotate a random sample.
    CalibrationResult result;
    const std::size_t take = std::min(budget, calibration.size());
    result.selected = select_random(calibration.size(), take, StableHash().add(seed).add("select").digest());
    AnnotationOracle oracle(calibration, take);
    std::vector<ScoredTriple> gold;
    gold.reserve(take);
    for (std::size_t idx : result.selected) {
        ScoredTriple t = calibration[idx];
        t.oracle_label = oracle.annotate(idx);
        gold.push_back(std::move(t));
    }
    result.spent = oracle.spent();
    switch (method.kind) {
        case MethodKind::LocalAcc:
            result.thresholds = calibrate_local_opt(gold, Metric::Accuracy, method.scope);
            break;
        case MethodKind::LocalF1:
            result.thresholds = calibrate_local_opt(gold, Metric::F1, method.scope);
            break;
        case MethodKind::GlobalF1:
            result.thresholds = calibrate_global_opt(gold, method.grid_steps);
            break;
        case MethodKind::Actc:
            break;
    }
    return result;
}

TrialResult run_trial(const Dataset& calibration, const Dataset& test, const MethodConfig& method,
                      std::size_t budget, std::uint64_t seed) {
    const auto calibrated = calibrate_method(calibration, method, budget, seed);
    TrialResult out;
    out.metrics = evaluate_thresholds(calibrated.thresholds, test);
    out.degraded = calibrated.degraded_sets;
    out.fallbacks = calibrated.fallback_sets;
    return out;
}

TrialResult run_trial(const std::filesystem::path& calibration, const std::filesystem::path& test,
                      const MethodConfig& method, std::size_t budget, std::uint64_t seed) {
    const Dataset calib = load_scored_triples(calibration);
    const Dataset test_set = load_scored_triples(test);
    return run_trial(calib, test_set, method, budget, seed);
}

void validate(const SweepConfig& config) {
    if (config.repeats == 0) {
        throw InputError("sweep: repeats must be at least 1");
    }
    if (config.budgets.empty()) {
        throw InputError("sweep: at least one budget is required");
    }
    for (std::size_t i = 1; i < config.budgets.size(); ++i) {
        if (config.budgets[i] <= config.budgets[i - 1]) {
            throw InputError("sweep: budgets must be strictly increasing");
        }
    }
    if (config.methods.empty()) {
        throw InputError("sweep: at least one method is required");
    }
}

std::uint64_t trial_seed(std::uint64_t master_seed, std::string_view label, std::size_t budget, std::size_t n,
                         std::size_t repeat) {
    return StableHash().add(master_seed).add(label).add(budget).add(n).add(repeat).digest();
}

std::size_t default_thread_count() {
    if (const char* env = std::getenv("THRESHCAL_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) {
            return static_cast<std::size_t>(v);
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

namespace {

struct CellSpec {
    const MethodConfig* method;
    std::size_t budget;
    std::size_t n;
};

SweepReport run_cells(const std::vector<CellSpec>& cells, const SweepConfig& config, const Dataset& calibration,
                      const Dataset& test) {
    const std::size_t repeats = config.repeats;
    const std::size_t jobs = cells.size() * repeats;
    std::vector<TrialResult> results(jobs);

    const std::size_t threads =
        std::max<std::size_t>(1, std::min(jobs, config.threads ? config.threads : default_thread_count()));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const auto worker = [&]() {
        while (true) {
            const std::size_t job = next.fetch_add(1);
            if (job >= jobs) return;
            const CellSpec& cell = cells[job / repeats];
            const std::size_t repeat = job % repeats;
            try {
                MethodConfig method = *cell.method;
                method.actc.min_set_size = cell.n;
                const auto seed = trial_seed(config.master_seed, method.label, cell.budget, cell.n, repeat);
                results[job] = run_trial(calibration, test, method, cell.budget, seed);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(jobs);
            }
        }
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    SweepReport report;
    std::map<std::pair<std::string, std::size_t>, std::vector<const ReportCell*>> groups;
    std::vector<std::pair<std::string, std::size_t>> group_order;
    report.cells.reserve(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
        std::vector<double> acc;
        std::vector<double> f1;
        ReportCell rc;
        rc.method = cells[c].method->label;
        rc.budget = cells[c].budget;
        rc.n = cells[c].n;
        rc.repeats = repeats;
        for (std::size_t r = 0; r < repeats; ++r) {
            const auto& tr = results[c * repeats + r];
            acc.push_back(tr.metrics.accuracy);
            f1.push_back(tr.metrics.f1);
            rc.degraded += tr.degraded > 0 ? 1 : 0;
            rc.fallbacks += tr.fallbacks > 0 ? 1 : 0;
        }
        const auto a = mean_and_sem(acc);
        const auto f = mean_and_sem(f1);
        rc.acc_mean = a.mean;
        rc.acc_sem = a.sem;
        rc.f1_mean = f.mean;
        rc.f1_sem = f.sem;
        report.cells.push_back(std::move(rc));
    }
    for (const auto& rc : report.cells) {
        const auto key = std::make_pair(rc.method, rc.n);
        if (!groups.contains(key)) group_order.push_back(key);
        groups[key].push_back(&rc);
    }
    for (const auto& key : group_order) {
        const auto& members = groups[key];
        MethodAverage avg{key.first, key.second, 0.0, 0.0};
        for (const ReportCell* rc : members) {
            avg.acc_mean += rc->acc_mean;
            avg.f1_mean += rc->f1_mean;
        }
        avg.acc_mean /= static_cast<double>(members.size());
        avg.f1_mean /= static_cast<double>(members.size());
        report.averages.push_back(std::move(avg));
    }
    return report;
}

}  // namespace

SweepReport run_sweep(const SweepConfig& config, const Dataset& calibration, const Dataset& test) {
    validate(config);
    std::vector<CellSpec> cells;
    for (const auto& m : config.methods) {
        for (std::size_t b : config.budgets) {
            cells.push_back({&m, b, m.kind == MethodKind::Actc ? m.actc.min_set_size : 0});
        }
    }
    return run_cells(cells, config, calibration, test);
}

SweepReport run_sweep(const SweepConfig& config, const std::filesystem::path& calibration,
                      const std::filesystem::path& test) {
    return run_sweep(config, load_scored_triples(calibration), load_scored_triples(test));
}

SweepReport run_n_ablation(const SweepConfig& config, const Dataset& calibration, const Dataset& test) {
    if (config.n_values.empty()) {
        throw InputError("n ablation: n_values must not be empty");
    }
    SweepConfig cfg = config;
    std::vector<MethodConfig> actc;
    for (const auto& m : config.methods) {
        if (m.kind == MethodKind::Actc) actc.push_back(m);
    }
    if (actc.empty()) {
        actc.push_back(parse_method("actc-lr-dens"));
    }
    cfg.methods = actc;
    validate(cfg);
    std::vector<CellSpec> cells;
    for (const auto& m : cfg.methods) {
        for (std::size_t n : cfg.n_values) {
            if (n == 0) throw InputError("n ablation: n must be at least 1");
            for (std::size_t b : cfg.budgets) {
                cells.push_back({&m, b, n});
            }
        }
    }
    return run_cells(cells, cfg, calibration, test);
}

SweepReport run_n_ablation(const SweepConfig& config, const std::filesystem::path& calibration,
                           const std::filesystem::path& test) {
    return run_n_ablation(config, load_scored_triples(calibration), load_scored_triples(test));
}

namespace {

std::uint64_t parse_uint(std::string_view v, const std::string& source, std::size_t line) {
    v = trim(v);
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
        throw ParseError(source, line, "expected a non-negative integer, got '" + std::string(v) + "'");
    }
    return out;
}

double parse_positive(std::string_view v, const std::string& source, std::size_t line, bool allow_zero = false) {
    const auto r = parse_real(trim(v), false);
    if (!r || *r < 0.0 || (!allow_zero && *r == 0.0)) {
        throw ParseError(source, line, "expected a positive real, got '" + std::string(v) + "'");
    }
    return *r;
}

std::vector<std::size_t> parse_list(std::string_view v, const std::string& source, std::size_t line) {
    std::vector<std::size_t> out;
    for (auto part : split(v, ',')) {
        out.push_back(static_cast<std::size_t>(parse_uint(part, source, line)));
    }
    return out;
}

bool parse_bool(std::string_view v, const std::string& source, std::size_t line) {
    v = trim(v);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ParseError(source, line, "expected a boolean, got '" + std::string(v) + "'");
}

}  // namespace

SweepConfig parse_sweep_config(std::istream& in, const std::string& source) {
    SweepConfig cfg;
    MethodDefaults defaults;
    std::vector<std::string> method_labels;
    std::size_t methods_line = 0;
    bool length_scale_set = false;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto content = trim(line);
        if (content.empty() || content.front() == '#') continue;
        const auto eq = content.find('=');
        if (eq == std::string_view::npos) {
            throw ParseError(source, line_no, "expected 'key = value'");
        }
        const std::string key(trim(content.substr(0, eq)));
        const std::string_view value = trim(content.substr(eq + 1));
        try {
            if (key == "budgets") {
                cfg.budgets = parse_list(value, source, line_no);
            } else if (key == "repeats") {
                cfg.repeats = parse_uint(value, source, line_no);
            } else if (key == "n_values") {
                cfg.n_values = parse_list(value, source, line_no);
            } else if (key == "master_seed") {
                cfg.master_seed = parse_uint(value, source, line_no);
            } else if (key == "threads") {
                cfg.threads = parse_uint(value, source, line_no);
            } else if (key == "calibration") {
                cfg.calibration_path = std::string(value);
            } else if (key == "test") {
                cfg.test_path = std::string(value);
            } else if (key == "methods") {
                method_labels.clear();
                for (auto part : split(value, ',')) method_labels.emplace_back(trim(part));
                methods_line = line_no;
            } else if (key == "n") {
                defaults.n = parse_uint(value, source, line_no);
            } else if (key == "kernel") {
                defaults.classifier.kernel.kind = parse_kernel_kind(value);
            } else if (key == "length_scale") {
                defaults.classifier.kernel.length_scale = parse_positive(value, source, line_no);
                length_scale_set = true;
            } else if (key == "nu") {
                defaults.classifier.kernel.nu = parse_positive(value, source, line_no);
            } else if (key == "alpha") {
                defaults.classifier.kernel.alpha = parse_positive(value, source, line_no);
            } else if (key == "jitter") {
                defaults.classifier.kernel.jitter = parse_positive(value, source, line_no, true);
            } else if (key == "inv_reg_c") {
                defaults.classifier.inv_reg_c = parse_positive(value, source, line_no);
            } else if (key == "gp_cap") {
                defaults.classifier.gp_cap = parse_uint(value, source, line_no);
            } else if (key == "labels") {
                if (value == "hard") defaults.label_mode = LabelMode::Hard;
                else if (value == "soft") defaults.label_mode = LabelMode::Soft;
                else throw ParseError(source, line_no, "labels must be hard or soft");
            } else if (key == "auto") {
                if (value == "topup") defaults.auto_extent = AutoExtent::TopUp;
                else if (value == "all") defaults.auto_extent = AutoExtent::All;
                else throw ParseError(source, line_no, "auto must be topup or all");
            } else if (key == "density_order") {
                if (value == "max") defaults.density_order = DensityOrder::Max;
                else if (value == "min") defaults.density_order = DensityOrder::Min;
                else throw ParseError(source, line_no, "density_order must be max or min");
            } else if (key == "grid_steps") {
                defaults.grid_steps = parse_uint(value, source, line_no);
            } else if (key == "strict_pseudocode") {
                defaults.strict_pseudocode = parse_bool(value, source, line_no);
            } else {
                throw ParseError(source, line_no, "unknown key '" + key + "'");
            }
        } catch (const InputError& e) {
            throw ParseError(source, line_no, e.what());
        }
    }
    if (!length_scale_set) {
        // RBF at 10, Matern and RationalQuadratic at 0.1
        defaults.classifier.kernel.length_scale =
            defaults.classifier.kernel.kind == KernelKind::RBF ? 10.0 : 0.1;
    }
    for (const auto& label : method_labels) {
        try {
            cfg.methods.push_back(parse_method(label, defaults));
        } catch (const InputError& e) {
            throw ParseError(source, methods_line, e.what());
        }
    }
    return cfg;
}

SweepConfig load_sweep_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    auto cfg = parse_sweep_config(in, path.string());
    // Relative data paths resolve against the config's directory.
    const auto base = path.parent_path();
    for (auto* p : {&cfg.calibration_path, &cfg.test_path}) {
        if (*p && p->value().is_relative()) *p = base / p->value();
    }
    return cfg;
}

void write_report_markdown(std::ostream& out, const SweepReport& report) {
    if (report.averages.empty()) {
        throw InputError("write_report_markdown: empty report");
    }
    // An n column only when some method was run at several n (the ablation).
    std::set<std::string> seen;
    bool several_n = false;
    for (const auto& a : report.averages) {
        if (!seen.insert(a.method).second) several_n = true;
    }
    const auto pct = [](double v) { return static_cast<long>(std::lround(100.0 * v)); };
    if (several_n) {
        out << "| Method | n | Acc | F1 |\n|---|---:|---:|---:|\n";
    } else {
        out << "| Method | Acc | F1 |\n|---|---:|---:|\n";
    }
    for (const auto& a : report.averages) {
        out << "| " << a.method << " | ";
        if (several_n) out << a.n << " | ";
        out << pct(a.acc_mean) << " | " << pct(a.f1_mean) << " |\n";
    }
}

}  // namespace threshcal
