#include "threshcal/core.hpp"

#include "threshcal/error.hpp"

namespace threshcal {

Metrics compute_metrics(const std::vector<bool>& predictions, const std::vector<bool>& gold) {
    if (predictions.size() != gold.size()) {
        throw InputError("compute_metrics: " + std::to_string(predictions.size()) +
                         " predictions vs " + std::to_string(gold.size()) + " gold labels");
    }
    if (gold.empty()) {
        throw InputError("compute_metrics: empty input");
    }
    Metrics m;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        if (predictions[i]) {
            gold[i] ? ++m.tp : ++m.fp;
        } else {
            gold[i] ? ++m.fn : ++m.tn;
        }
    }
    m.accuracy = static_cast<double>(m.tp + m.tn) / static_cast<double>(gold.size());
    m.f1 = f1_from_counts(static_cast<double>(m.tp), static_cast<double>(m.fp),
                          static_cast<double>(m.fn));
    return m;
}

double weighted_accuracy(std::span<const LabeledPoint> points, double threshold) {
    if (points.empty()) {
        throw InputError("weighted_accuracy: empty decision set");
    }
    double correct = 0.0;
    for (const auto& p : points) {
        correct += classify(p.score, threshold) ? p.weight : 1.0 - p.weight;
    }
    return correct / static_cast<double>(points.size());
}

double weighted_f1(std::span<const LabeledPoint> points, double threshold) {
    if (points.empty()) {
        throw InputError("weighted_f1: empty decision set");
    }
    double tp = 0.0;
    double fp = 0.0;
    double fn = 0.0;
    for (const auto& p : points) {
        if (classify(p.score, threshold)) {
            tp += p.weight;
            fp += 1.0 - p.weight;
        } else {
            fn += p.weight;
        }
    }
    return f1_from_counts(tp, fp, fn);
}

double evaluate_metric(std::span<const LabeledPoint> points, double threshold, Metric metric) {
    return metric == Metric::Accuracy ? weighted_accuracy(points, threshold)
                                      : weighted_f1(points, threshold);
}

}  // namespace threshcal
