#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace threshcal {

using RelationId = std::string;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Threshold used for relations that have no estimate. Raw-score 0 is 0.5 in
/// the sigmoid view.
inline constexpr double kDefaultThreshold = 0.0;

enum class Provenance : std::uint8_t { Gold, Auto };

/// One point of a decision set. `weight` is the probability of the positive
/// class: 1 and 0 are hard labels, anything in between is a soft label.
struct LabeledPoint {
    double score = 0.0;
    double weight = 0.0;
    Provenance provenance = Provenance::Gold;

    static LabeledPoint gold(double score, bool positive) {
        return {score, positive ? 1.0 : 0.0, Provenance::Gold};
    }
    static LabeledPoint automatic(double score, double weight) {
        return {score, weight, Provenance::Auto};
    }
};

struct DecisionSet {
    std::optional<RelationId> relation;  // empty for the uniform variant
    std::vector<LabeledPoint> points;
};

/// Per-relation thresholds plus a fallback for relations without one.
/// +inf rejects every score, -inf accepts every score.
struct ThresholdMap {
    std::map<RelationId, double> per_relation;
    double default_threshold = kDefaultThreshold;

    double lookup(const RelationId& relation) const {
        auto it = per_relation.find(relation);
        return it == per_relation.end() ? default_threshold : it->second;
    }

    friend bool operator==(const ThresholdMap&, const ThresholdMap&) = default;
};

struct Metrics {
    double accuracy = 0.0;
    double f1 = 0.0;
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t tn = 0;
    std::size_t fn = 0;
};

enum class Metric : std::uint8_t { Accuracy, F1 };

/// Decision rule: positive iff score >= threshold.
constexpr bool classify(double score, double threshold) noexcept {
    return score >= threshold;
}

/// Confusion counts and accuracy/F1 of the positive class.
/// Throws InputError on length mismatch or empty input.
Metrics compute_metrics(const std::vector<bool>& predictions, const std::vector<bool>& gold);

/// Mean per-point agreement where a soft label w contributes w when predicted
/// positive and 1-w otherwise. Throws InputError on an empty set.
double weighted_accuracy(std::span<const LabeledPoint> points, double threshold);

/// F1 with soft counts tp = sum w, fp = sum 1-w over predicted positives and
/// fn = sum w over predicted negatives. Throws InputError on an empty set.
double weighted_f1(std::span<const LabeledPoint> points, double threshold);

double evaluate_metric(std::span<const LabeledPoint> points, double threshold, Metric metric);

/// 2tp / (2tp + fp + fn), 0 when the denominator vanishes.
constexpr double f1_from_counts(double tp, double fp, double fn) noexcept {
    const double denom = 2.0 * tp + fp + fn;
    return denom > 0.0 ? 2.0 * tp / denom : 0.0;
}

}  // namespace threshcal
