#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace threshcal {

/// Aggregate of one (method, budget, n) cell over its repeats.
/// Standard errors are absent when fewer than two repeats were run.
struct ReportCell {
    std::string method;
    std::size_t budget = 0;
    std::size_t n = 0;
    std::size_t repeats = 0;
    double acc_mean = 0.0;
    std::optional<double> acc_sem;
    double f1_mean = 0.0;
    std::optional<double> f1_sem;
    std::size_t degraded = 0;   // trials with a decision set short of n
    std::size_t fallbacks = 0;  // trials that fell back to the pooled classifier or to gold only
};

/// Per-method mean of cell means, each budget weighted equally.
struct MethodAverage {
    std::string method;
    std::size_t n = 0;
    double acc_mean = 0.0;
    double f1_mean = 0.0;
};

struct SweepReport {
    std::vector<ReportCell> cells;
    std::vector<MethodAverage> averages;
};

struct MeanSem {
    double mean = 0.0;
    std::optional<double> sem;
};

/// Arithmetic mean and standard error (sample sd / sqrt(count)).
MeanSem mean_and_sem(std::span<const double> values);

}  // namespace threshcal
