#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "threshcal/calibration.hpp"
#include "threshcal/report.hpp"

namespace threshcal {

enum class MethodKind : std::uint8_t { Actc, LocalAcc, LocalF1, GlobalF1 };

/// A calibration method as run by the harness. For ACTC, `actc.budget` and
/// `actc.seed` are overwritten per trial.
struct MethodConfig {
    std::string label;
    MethodKind kind = MethodKind::Actc;
    ActcConfig actc;
    Scope scope = Scope::PerRelation;  // LocalOpt variants
    std::size_t grid_steps = 101;      // GlobalOpt
};

/// Settings shared by every method parsed from a label.
struct MethodDefaults {
    std::size_t n = 500;
    ClassifierConfig classifier;
    LabelMode label_mode = LabelMode::Hard;
    AutoExtent auto_extent = AutoExtent::TopUp;
    DensityOrder density_order = DensityOrder::Max;
    std::size_t grid_steps = 101;
    bool strict_pseudocode = false;
};

/// Labels: local-acc, local-f1, global-f1 (LocalOpt accepts a -uni suffix);
/// actc-{lr|gp}-{rndm|dens|unc|dwu} followed by any of -uni, -f1, -soft, -all.
/// Throws InputError on anything else.
MethodConfig parse_method(std::string_view label, const MethodDefaults& defaults = {});

struct TrialResult {
    Metrics metrics;
    std::size_t degraded = 0;
    std::size_t fallbacks = 0;
};

/// Calibrates on `calibration` (its labels are the oracle) and scores the
/// thresholds on `test`. The test split is only read after calibration.
TrialResult run_trial(const Dataset& calibration, const Dataset& test, const MethodConfig& method,
                      std::size_t budget, std::uint64_t seed);
TrialResult run_trial(const std::filesystem::path& calibration, const std::filesystem::path& test,
                      const MethodConfig& method, std::size_t budget, std::uint64_t seed);

/// Thresholds a method produces for one trial, without scoring them.
CalibrationResult calibrate_method(const Dataset& calibration, const MethodConfig& method, std::size_t budget,
                                   std::uint64_t seed);

struct SweepConfig {
    std::vector<std::size_t> budgets{1, 2, 5, 10, 20, 50, 100, 200, 500, 1000};
    std::size_t repeats = 100;
    std::vector<MethodConfig> methods;
    std::vector<std::size_t> n_values;
    std::uint64_t master_seed = 12345;
    std::size_t threads = 0;  // 0: THRESHCAL_THREADS or hardware concurrency
    std::optional<std::filesystem::path> calibration_path;
    std::optional<std::filesystem::path> test_path;
};

/// Throws InputError when budgets are not strictly increasing, repeats is 0
/// or no method is given.
void validate(const SweepConfig& config);

/// Seed of one trial: StableHash(master_seed, label, budget, n, repeat).
std::uint64_t trial_seed(std::uint64_t master_seed, std::string_view label, std::size_t budget, std::size_t n,
                         std::size_t repeat);

/// Every (method, budget) cell over `repeats` trials, run in parallel and
/// merged in (method, budget, repeat) order.
SweepReport run_sweep(const SweepConfig& config, const Dataset& calibration, const Dataset& test);
SweepReport run_sweep(const SweepConfig& config, const std::filesystem::path& calibration,
                      const std::filesystem::path& test);

/// ACTC methods of the config (actc-lr-dens when none) swept over every n in
/// n_values.
SweepReport run_n_ablation(const SweepConfig& config, const Dataset& calibration, const Dataset& test);
SweepReport run_n_ablation(const SweepConfig& config, const std::filesystem::path& calibration,
                           const std::filesystem::path& test);

/// Reads a flat `key = value` file. Keys: budgets, repeats, methods, n_values,
/// master_seed, threads, calibration, test, and the method defaults n,
/// classifier settings (kernel, length_scale, nu, alpha, jitter, inv_reg_c,
/// gp_cap), labels, auto, density_order, grid_steps, strict_pseudocode.
SweepConfig parse_sweep_config(std::istream& in, const std::string& source = "<config>");
SweepConfig load_sweep_config(const std::filesystem::path& path);

/// Methods x (Acc, F1) of the per-method averages, in %, rounded to integers.
void write_report_markdown(std::ostream& out, const SweepReport& report);

/// THRESHCAL_THREADS when set to a positive integer, else hardware concurrency.
std::size_t default_thread_count();

}  // namespace threshcal
