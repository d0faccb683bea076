// Acceptance suite. Prints one PASS/FAIL/SKIP line per criterion and exits
// non-zero when any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "threshcal/calibration.hpp"
#include "threshcal/classifiers.hpp"
#include "threshcal/data_io.hpp"
#include "threshcal/experiments.hpp"
#include "threshcal/selection.hpp"

using namespace threshcal;

namespace {

enum class Outcome { Pass, Fail, Skip };

struct Check {
    Outcome outcome;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

Check pass_if(bool ok, std::string detail) {
    return {ok ? Outcome::Pass : Outcome::Fail, std::move(detail)};
}

// --- 1 ---------------------------------------------------------------------
Check threshold_search() {
    const auto t0 = Clock::now();
    Rng rng(1);
    std::size_t mismatches = 0;
    for (int inst = 0; inst < 1000; ++inst) {
        const std::size_t n = 1 + rng.below(50);
        DecisionSet set;
        // Coarse scores so ties are common.
        const bool coarse = inst % 2 == 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double s = coarse ? static_cast<double>(rng.below(7)) : rng.normal();
            set.points.push_back(LabeledPoint::gold(s, rng.uniform() < 0.5));
        }
        for (Metric m : {Metric::Accuracy, Metric::F1}) {
            const auto est = estimate_threshold(set, m);
            const double brute = oracle::best_metric(set.points, m);
            const double at_thr = oracle::metric(set.points, est.threshold, m);
            if (est.value != brute || at_thr != brute) {
                ++mismatches;
            }
        }
    }
    const double secs = seconds_since(t0);
    return pass_if(mismatches == 0 && secs < 5.0,
                   fmt("2000 searches, %zu mismatches, %.2fs", mismatches, secs));
}

// --- 2 ---------------------------------------------------------------------
Check matern_forms() {
    Rng rng(2);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const double nu = std::array{0.5, 1.5, 2.5}[i % 3];
        const double l = 0.01 + 10.0 * rng.uniform();
        const double d = 5.0 * l * rng.uniform();
        const double closed = matern_closed_form(nu, l, d);
        const double bessel = matern_bessel(nu, l, d);
        // Bessel form evaluated here as well, straight from the definition.
        const double z = std::sqrt(2.0 * nu) * d / l;
        const double direct =
            d == 0.0 ? 1.0 : std::pow(z, nu) * std::cyl_bessel_k(nu, z) / (std::tgamma(nu) * std::pow(2.0, nu - 1.0));
        worst = std::max({worst, std::abs(closed - bessel), std::abs(closed - direct)});
    }
    return pass_if(worst <= 1e-10, fmt("10000 (nu, l, d) triples, max |diff| %.2e", worst));
}

// --- 3 ---------------------------------------------------------------------
Check classifier_oracles() {
    Rng rng(3);
    std::size_t lr_losses = 0;
    for (int inst = 0; inst < 50; ++inst) {
        const auto data = oracle::random_instance(rng, 10 + rng.below(40));
        const double c = std::array{0.1, 1.0, 100.0}[inst % 3];
        const auto model = fit_logistic(data.scores, data.labels, c);
        const double fitted = oracle::lr_objective(model.weight, model.bias, data.scores, data.labels, c);
        const double grid = oracle::lr_grid_min(data.scores, data.labels, c, -10.0, 10.0);
        if (fitted > grid) {
            ++lr_losses;
        }
    }

    double mode_err = 0.0;
    double quad_err = 0.0;
    for (int inst = 0; inst < 20; ++inst) {
        const auto data = oracle::random_instance(rng, 5 + rng.below(40), 1.5);
        KernelSpec spec;
        spec.kind = std::array{KernelKind::RBF, KernelKind::Matern, KernelKind::RationalQuadratic}[inst % 3];
        spec.length_scale = std::array{1.0, 0.5, 0.1}[inst % 3];
        const auto post = fit_gp(data.scores, data.labels, spec);
        // Reference Gram built straight from the kernel formulas.
        const auto n = static_cast<Eigen::Index>(data.scores.size());
        Eigen::MatrixXd k(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                const double d = std::abs(data.scores[i] - data.scores[j]);
                const double l = spec.length_scale;
                double v = 0.0;
                switch (spec.kind) {
                case KernelKind::RBF: v = std::exp(-d * d / (2 * l * l)); break;
                case KernelKind::Matern: {
                    const double r = std::sqrt(3.0) * d / l;
                    v = (1 + r) * std::exp(-r);
                    break;
                }
                case KernelKind::RationalQuadratic: v = 1.0 / (1.0 + d * d / (2 * l * l)); break;
                }
                k(i, j) = v + (i == j ? post.kernel.jitter : 0.0);
            }
        }
        const Eigen::VectorXd ref = oracle::gp_mode(k, data.labels);
        mode_err = std::max(mode_err, (ref - post.mode).lpNorm<Eigen::Infinity>());

        for (int q = 0; q < 25; ++q) {
            const double x = -4.0 + 8.0 * rng.uniform();
            const auto lat = predict_gp_latent(post, x);
            const double p = predict_gp(post, x);
            quad_err = std::max(quad_err, std::abs(p - oracle::logistic_gaussian(lat.mean, lat.variance)));
        }
    }
    const bool ok = lr_losses == 0 && mode_err <= 1e-6 && quad_err <= 5e-3;
    return pass_if(ok, fmt("LR grid losses %zu/50; GP mode max err %.2e; predictive vs quadrature %.2e",
                           lr_losses, mode_err, quad_err));
}

// --- 4 ---------------------------------------------------------------------
Check lr_gradient() {
    Rng rng(4);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const auto data = oracle::random_instance(rng, 5 + rng.below(60));
        const double c = std::exp(rng.normal() * 2.0);
        const double w = 3.0 * rng.normal();
        const double b = 3.0 * rng.normal();
        const auto g = logistic_gradient(w, b, data.scores, data.labels, c);
        const double hw = 1e-5 * std::max(1.0, std::abs(w));
        const double hb = 1e-5 * std::max(1.0, std::abs(b));
        auto f = [&](double ww, double bb) { return logistic_objective(ww, bb, data.scores, data.labels, c); };
        const double nw = (f(w + hw, b) - f(w - hw, b)) / (2 * hw);
        const double nb = (f(w, b + hb) - f(w, b - hb)) / (2 * hb);
        const double scale = std::max({1.0, std::abs(g[0]), std::abs(g[1])});
        worst = std::max({worst, std::abs(g[0] - nw) / scale, std::abs(g[1] - nb) / scale});
    }
    return pass_if(worst < 1e-5, fmt("100 points, max relative error %.2e", worst));
}

// --- 5 ---------------------------------------------------------------------
Check density_identity() {
    Rng rng(5);
    double worst = 0.0;
    for (int inst = 0; inst < 500; ++inst) {
        const std::size_t n = 1 + rng.below(200);
        const double offset = 100.0 * rng.normal();
        std::vector<double> s(n);
        for (auto& v : s) {
            v = offset + rng.normal() * std::exp(rng.normal());
        }
        const auto fast = density_scores(s);
        const auto slow = oracle::density(s);
        const double scale = std::max(1e-300, *std::max_element(slow.begin(), slow.end()));
        for (std::size_t i = 0; i < n; ++i) {
            worst = std::max(worst, std::abs(fast[i] - slow[i]) / scale);
        }
    }
    const std::vector<double> tiny{0.0, 1.0, 2.0};
    auto picked = select_density(tiny, 2);
    const std::set<std::size_t> got(picked.begin(), picked.end());
    const bool pick_ok = got == std::set<std::size_t>{0, 2};
    return pass_if(worst <= 1e-9 && pick_ok,
                   fmt("500 instances, max relative error %.2e; [0,1,2], l=2 -> {%zu,%zu}", worst,
                       picked.size() > 0 ? picked[0] : 99, picked.size() > 1 ? picked[1] : 99));
}

// --- 6, 7 ------------------------------------------------------------------
SyntheticSpec uniform_family(std::size_t relations, std::size_t per_class, std::uint64_t seed) {
    SyntheticSpec spec;
    spec.seed = seed;
    spec.per_relation.assign(relations, RelationSpec{per_class, per_class, 2.0, -2.0, 1.0});
    return spec;
}

MethodConfig method(std::string_view label, std::size_t n) {
    MethodDefaults defaults;
    defaults.n = n;
    return parse_method(label, defaults);
}

double mean_accuracy(const SweepReport& report, std::string_view label) {
    for (const auto& cell : report.cells) {
        if (cell.method == label) {
            return cell.acc_mean;
        }
    }
    return std::nan("");
}

Check synthetic_recovery() {
    const auto t0 = Clock::now();
    const auto calib = generate_synthetic(uniform_family(20, 50, 601));
    const auto test = generate_synthetic(uniform_family(20, 50, 602));
    SweepConfig cfg;
    cfg.budgets = {200};
    cfg.repeats = 100;
    cfg.methods = {method("actc-lr-rndm", 100)};
    const auto report = run_sweep(cfg, calib.dataset, test.dataset);
    const double acc = 100.0 * mean_accuracy(report, "actc-lr-rndm");
    const double bayes = 100.0 * normal_cdf(2.0);
    const double secs = seconds_since(t0);
    return pass_if(std::abs(acc - bayes) <= 2.0 && secs < 60.0,
                   fmt("ACTC-LR_rndm %.2f%% vs Bayes %.2f%% over 100 repeats, %.1fs", acc, bayes, secs));
}

// Skewed relation sizes: relation r holds about 120 * 0.75^r points per class.
SyntheticSpec skewed_family(std::uint64_t seed) {
    SyntheticSpec spec;
    spec.seed = seed;
    for (int r = 0; r < 20; ++r) {
        const auto size = static_cast<std::size_t>(std::max(3.0, std::round(120.0 * std::pow(0.75, r))));
        spec.per_relation.push_back(RelationSpec{size, size, 2.0, -2.0, 1.0});
    }
    return spec;
}

Check small_budget_advantage() {
    const auto calib = generate_synthetic(skewed_family(701));
    const auto test = generate_synthetic(skewed_family(702));
    SweepConfig cfg;
    cfg.budgets = {10};
    cfg.repeats = 100;
    cfg.methods = {method("actc-lr-rndm", 100), method("local-acc", 100)};
    const auto report = run_sweep(cfg, calib.dataset, test.dataset);
    const double actc = 100.0 * mean_accuracy(report, "actc-lr-rndm");
    const double local = 100.0 * mean_accuracy(report, "local-acc");
    const double gap = actc - local;
    std::string detail = fmt("ACTC-LR_rndm %.2f%% vs LocalOpt(Acc) %.2f%%, gap %+.2f pp (target >= 3)", actc,
                             local, gap);
    if (gap >= 3.0) {
        return {Outcome::Pass, detail};
    }
    // Direction is the hard requirement; a positive gap under the target is
    // reported but does not pass.
    return {Outcome::Fail, detail + (gap > 0 ? " [direction holds, margin short]" : "")};
}

// --- 8 ---------------------------------------------------------------------
Check determinism() {
    const auto calib = generate_synthetic(uniform_family(6, 30, 801));
    const auto test = generate_synthetic(uniform_family(6, 30, 802));
    SweepConfig cfg;
    cfg.budgets = {2, 10, 40};
    cfg.repeats = 10;
    cfg.master_seed = 12345;
    for (const char* label : {"actc-lr-rndm", "actc-lr-dens", "actc-gp-rndm", "actc-lr-dwu-soft", "local-acc",
                              "local-f1", "global-f1"}) {
        cfg.methods.push_back(method(label, 50));
    }
    auto render = [&](std::size_t threads) {
        cfg.threads = threads;
        std::ostringstream out;
        write_report_csv(out, run_sweep(cfg, calib.dataset, test.dataset));
        return out.str();
    };
    const std::string a = render(1);
    const std::string b = render(1);
    const std::string c = render(4);
    return pass_if(!a.empty() && a == b && a == c,
                   fmt("%zu-byte CSV; rerun identical: %s; 4 threads identical: %s", a.size(),
                       a == b ? "yes" : "no", a == c ? "yes" : "no"));
}

// --- 9 ---------------------------------------------------------------------
Check transform_invariance() {
    Rng rng(9);
    std::size_t flips = 0;
    std::size_t decisions = 0;
    for (int inst = 0; inst < 100; ++inst) {
        std::vector<ScoredTriple> gold, test;
        const std::size_t rels = 1 + rng.below(4);
        for (std::size_t i = 0; i < 5 + rng.below(60); ++i) {
            const bool pos = rng.uniform() < 0.5;
            const auto rel = "r" + std::to_string(rng.below(rels));
            gold.push_back({"h" + std::to_string(i), rel, "t", rng.normal() + (pos ? 1 : -1), pos});
        }
        for (std::size_t i = 0; i < 100; ++i) {
            // Only relations with gold; the fixed default is not a fitted value.
            const auto& rel = gold[rng.below(gold.size())].relation;
            test.push_back({"x" + std::to_string(i), rel, "t", 2.0 * rng.normal(), std::nullopt});
        }
        auto moved = [](std::vector<ScoredTriple> v) {
            for (auto& t : v) {
                t.score = 2.0 * t.score + 7.0;
            }
            return v;
        };
        const auto gold2 = moved(gold);
        const auto test2 = moved(test);
        for (Metric m : {Metric::Accuracy, Metric::F1}) {
            for (Scope scope : {Scope::PerRelation, Scope::Uniform}) {
                const auto a = calibrate_local_opt(gold, m, scope);
                const auto b = calibrate_local_opt(gold2, m, scope);
                for (std::size_t i = 0; i < test.size(); ++i) {
                    const double ta = a.lookup(test[i].relation);
                    const double tb = b.lookup(test[i].relation);
                    ++decisions;
                    if (classify(test[i].score, ta) != classify(test2[i].score, tb)) {
                        ++flips;
                    }
                }
            }
        }
    }
    return pass_if(flips == 0, fmt("%zu decisions over 100 instances, %zu changed", decisions, flips));
}

// --- 10 --------------------------------------------------------------------
Check real_data() {
    const char* calib = std::getenv("THRESHCAL_CODEX_CALIB");
    const char* test = std::getenv("THRESHCAL_CODEX_TEST");
    if (calib == nullptr || test == nullptr) {
        return {Outcome::Skip,
                "optional; set THRESHCAL_CODEX_CALIB and THRESHCAL_CODEX_TEST to labeled score dumps to run"};
    }
    SweepConfig cfg;
    cfg.methods = {method("actc-lr-rndm", 500), method("local-acc", 500)};
    const auto report = run_sweep(cfg, std::filesystem::path(calib), std::filesystem::path(test));
    double actc_acc = 0, actc_f1 = 0, loc_acc = 0, loc_f1 = 0;
    for (const auto& avg : report.averages) {
        if (avg.method == "actc-lr-rndm") {
            actc_acc = 100 * avg.acc_mean;
            actc_f1 = 100 * avg.f1_mean;
        } else if (avg.method == "local-acc") {
            loc_acc = 100 * avg.acc_mean;
            loc_f1 = 100 * avg.f1_mean;
        }
    }
    const bool ok = std::abs(actc_acc - 74) <= 2 && std::abs(actc_f1 - 74) <= 2 && std::abs(loc_acc - 70) <= 2 &&
                    std::abs(loc_f1 - 69) <= 2;
    return pass_if(ok, fmt("ACTC-LR_rndm %.1f/%.1f, LocalOpt(Acc) %.1f/%.1f (targets 74/74, 70/69)", actc_acc,
                           actc_f1, loc_acc, loc_f1));
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        std::function<Check()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "threshold-search optimality", threshold_search},
        {2, "Matern closed forms vs Bessel form", matern_forms},
        {3, "classifier oracles (LR grid, GP mode, GP quadrature)", classifier_oracles},
        {4, "LR gradient vs finite differences", lr_gradient},
        {5, "O(N) density identity and max-density pick", density_identity},
        {6, "synthetic recovery near Bayes accuracy", synthetic_recovery},
        {7, "small-budget advantage over LocalOpt(Acc)", small_budget_advantage},
        {8, "sweep determinism", determinism},
        {9, "LocalOpt invariance under 2s+7", transform_invariance},
        {10, "real-data table reproduction", real_data},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        Check result;
        try {
            result = c.run();
        } catch (const std::exception& e) {
            result = {Outcome::Fail, std::string("exception: ") + e.what()};
        }
        const char* tag = result.outcome == Outcome::Pass ? "PASS" : result.outcome == Outcome::Fail ? "FAIL" : "SKIP";
        std::printf("[%s] %2d %s: %s\n", tag, c.id, c.name, result.detail.c_str());
        std::fflush(stdout);
        failures += result.outcome == Outcome::Fail;
    }
    std::printf("%d failing criteria\n", failures);
    return failures == 0 ? 0 : 1;
}
