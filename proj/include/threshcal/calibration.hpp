#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "threshcal/classifiers.hpp"
#include "threshcal/core.hpp"
#include "threshcal/data_io.hpp"
#include "threshcal/rng.hpp"
#include "threshcal/selection.hpp"

namespace threshcal {

enum class Scope : std::uint8_t { PerRelation, Uniform };

/// TopUp auto-labels n - |gold| pool samples; All auto-labels the whole pool.
enum class AutoExtent : std::uint8_t { TopUp, All };

struct ActcConfig {
    SelectionStrategy strategy;
    std::size_t budget = 0;
    std::size_t min_set_size = 500;  // n
    ClassifierConfig classifier;
    LabelMode label_mode = LabelMode::Hard;
    Metric metric = Metric::Accuracy;
    Scope scope = Scope::PerRelation;
    AutoExtent auto_extent = AutoExtent::TopUp;
    std::uint64_t seed = 0;
    /// Search thresholds over gold points only, ignoring auto labels.
    bool strict_pseudocode = false;
};

/// Hands out labels of a fully labeled dataset, charging each triple once
/// against a fixed budget.
class AnnotationOracle {
public:
    AnnotationOracle(const Dataset& dataset, std::size_t budget);

    /// Label of triple `index`. Throws InputError when the budget is exhausted
    /// or the triple has no label.
    bool annotate(std::size_t index);

    std::size_t spent() const noexcept { return spent_; }
    std::size_t budget() const noexcept { return budget_; }

private:
    const Dataset* dataset_;
    std::size_t budget_;
    std::size_t spent_ = 0;
    std::vector<bool> charged_;
};

struct ThresholdEstimate {
    double threshold = kInf;
    double value = 0.0;  // metric at the returned threshold
};

/// Tries every distinct score of the set plus +inf as the threshold and
/// returns the smallest maximizer of the metric. A set without positive mass
/// returns +inf. Throws InputError on an empty set.
ThresholdEstimate estimate_threshold(const DecisionSet& set, Metric metric);

enum class ClassifierSource : std::uint8_t { None, Local, Global };

struct DecisionSetResult {
    DecisionSet set;
    std::size_t auto_points = 0;
    ClassifierSource source = ClassifierSource::None;
    bool degraded = false;  // fewer than n points could be assembled
    bool fallback = false;  // auto-labeling was due but no relation-local classifier was available
};

struct AutoLabelOptions {
    ClassifierConfig classifier;
    LabelMode label_mode = LabelMode::Hard;
    AutoExtent extent = AutoExtent::TopUp;
};

/// Gold points alone when there are at least n of them. Otherwise fits a
/// classifier (relation-local gold with both classes, else `global_fallback`,
/// else none) and auto-labels n - |gold| pool scores drawn uniformly from `rng`
/// (or the whole pool under AutoExtent::All).
DecisionSetResult build_decision_set(std::optional<RelationId> relation, std::vector<LabeledPoint> gold,
                                     std::span<const double> pool, std::size_t n,
                                     const AutoLabelOptions& options, const ProbClassifier* global_fallback,
                                     Rng& rng);

struct CalibrationResult {
    ThresholdMap thresholds;
    std::vector<std::size_t> selected;  // annotated triple indices, selection order
    std::size_t spent = 0;
    std::size_t degraded_sets = 0;
    std::size_t fallback_sets = 0;  // sets that used the pooled classifier or no classifier
};

/// Select min(budget, |dataset|) triples, annotate them from the dataset's own
/// labels, build one decision set per relation (or one for Scope::Uniform) and
/// estimate thresholds. Relations left without points get kDefaultThreshold.
CalibrationResult calibrate_actc(const Dataset& dataset, const ActcConfig& config);

/// Per relation, the estimate over that relation's gold only. Every entry of
/// `gold` must be labeled. With Scope::Uniform the single estimate becomes the
/// map's default.
ThresholdMap calibrate_local_opt(std::span<const ScoredTriple> gold, Metric metric,
                                 Scope scope = Scope::PerRelation);

/// One sorted pass over relations, each choosing the sigmoid-space grid value
/// {0, 1/(G-1), ..., 1} that maximizes F1 over all gold samples while
/// unprocessed relations sit at 0.5. Thresholds are returned in raw-score
/// space (logit of the grid value); the default is 0.
ThresholdMap calibrate_global_opt(std::span<const ScoredTriple> gold, std::size_t grid_steps = 101);

/// Applies `thresholds` to a labeled dataset.
Metrics evaluate_thresholds(const ThresholdMap& thresholds, const Dataset& test);

}  // namespace threshcal
