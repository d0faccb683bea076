#include "threshcal/calibration.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <string>

#include "threshcal/error.hpp"

namespace threshcal {

AnnotationOracle::AnnotationOracle(const Dataset& dataset, std::size_t budget)
    : dataset_(&dataset), budget_(budget), charged_(dataset.size(), false) {}

bool AnnotationOracle::annotate(std::size_t index) {
    if (index >= dataset_->size()) {
        throw InputError("oracle: index " + std::to_string(index) + " out of range");
    }
    const auto& t = (*dataset_)[index];
    if (!t.oracle_label) {
        throw InputError("oracle: no label for (" + t.head + ", " + t.relation + ", " + t.tail + ")");
    }
    if (!charged_[index]) {
        if (spent_ == budget_) {
            throw InputError("oracle: annotation budget of " + std::to_string(budget_) + " exhausted");
        }
        charged_[index] = true;
        ++spent_;
    }
    return *t.oracle_label;
}

ThresholdEstimate estimate_threshold(const DecisionSet& set, Metric metric) {
    const auto& pts = set.points;
    if (pts.empty()) {
        throw InputError("estimate_threshold: empty decision set");
    }
    std::vector<std::size_t> order(pts.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return pts[a].score < pts[b].score; });

    double total_pos = 0.0;
    double total_neg = 0.0;
    for (const auto& p : pts) {
        total_pos += p.weight;
        total_neg += 1.0 - p.weight;
    }
    const double count = static_cast<double>(pts.size());
    if (total_pos == 0.0) {
        return {kInf, evaluate_metric(pts, kInf, metric)};
    }

    // Walking candidates upwards, everything below the candidate is predicted
    // negative. below_pos/below_neg hold the label mass strictly below it.
    const auto value_at = [&](double below_pos, double below_neg) {
        const double tp = total_pos - below_pos;
        const double fp = total_neg - below_neg;
        if (metric == Metric::Accuracy) {
            return (tp + below_neg) / count;
        }
        return f1_from_counts(tp, fp, below_pos);
    };

    ThresholdEstimate best{pts[order.front()].score, -1.0};
    double below_pos = 0.0;
    double below_neg = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double candidate = pts[order[i]].score;
        const double v = value_at(below_pos, below_neg);
        if (v > best.value) {
            best = {candidate, v};
        }
        while (i < order.size() && pts[order[i]].score == candidate) {
            below_pos += pts[order[i]].weight;
            below_neg += 1.0 - pts[order[i]].weight;
            ++i;
        }
    }
    const double v_inf = value_at(total_pos, total_neg);
    if (v_inf > best.value) {
        best = {kInf, v_inf};
    }
    return best;
}

namespace {

using FallbackProvider = std::function<const ProbClassifier*()>;

bool has_both_classes(std::span<const LabeledPoint> gold) {
    bool pos = false;
    bool neg = false;
    for (const auto& p : gold) {
        (p.weight >= 0.5 ? pos : neg) = true;
    }
    return pos && neg;
}

std::optional<ProbClassifier> try_fit(const ClassifierConfig& config, std::span<const LabeledPoint> gold) {
    if (!has_both_classes(gold)) {
        return std::nullopt;
    }
    std::vector<double> scores;
    std::vector<bool> labels;
    scores.reserve(gold.size());
    labels.reserve(gold.size());
    for (const auto& p : gold) {
        scores.push_back(p.score);
        labels.push_back(p.weight >= 0.5);
    }
    try {
        return fit_classifier(config, scores, labels);
    } catch (const DegenerateLabels&) {
    } catch (const ConvergenceError&) {
    } catch (const NumericalError&) {
    } catch (const InputError&) {
        // training set above the GP cap
    }
    return std::nullopt;
}

DecisionSetResult build_decision_set_impl(std::optional<RelationId> relation, std::vector<LabeledPoint> gold,
                                          std::span<const double> pool, std::size_t n,
                                          const AutoLabelOptions& options, const FallbackProvider& fallback,
                                          Rng& rng) {
    if (n == 0) {
        throw InputError("build_decision_set: n must be at least 1");
    }
    DecisionSetResult out;
    out.set.relation = std::move(relation);
    const std::size_t gold_count = gold.size();
    if (gold_count >= n && options.extent == AutoExtent::TopUp) {
        out.set.points = std::move(gold);
        return out;
    }

    std::optional<ProbClassifier> local = try_fit(options.classifier, gold);
    const ProbClassifier* classifier = nullptr;
    if (local) {
        classifier = &*local;
        out.source = ClassifierSource::Local;
    } else if (const ProbClassifier* global = fallback ? fallback() : nullptr) {
        classifier = global;
        out.source = ClassifierSource::Global;
    }
    out.fallback = out.source != ClassifierSource::Local;

    std::vector<double> drawn;
    if (classifier != nullptr) {
        if (options.extent == AutoExtent::All) {
            drawn.assign(pool.begin(), pool.end());
        } else {
            const std::size_t want = n - gold_count;
            const auto picks = select_random(pool.size(), want, rng());
            drawn.reserve(picks.size());
            for (std::size_t i : picks) drawn.push_back(pool[i]);
        }
    }
    auto autos = classifier != nullptr ? auto_label(*classifier, drawn, options.label_mode)
                                       : std::vector<LabeledPoint>{};
    out.auto_points = autos.size();
    out.set.points = std::move(gold);
    out.set.points.insert(out.set.points.end(), autos.begin(), autos.end());
    out.degraded = out.set.points.size() < n;
    return out;
}

std::vector<LabeledPoint> gold_points_only(const std::vector<LabeledPoint>& pts) {
    std::vector<LabeledPoint> out;
    for (const auto& p : pts) {
        if (p.provenance == Provenance::Gold) out.push_back(p);
    }
    return out;
}

}  // namespace

DecisionSetResult build_decision_set(std::optional<RelationId> relation, std::vector<LabeledPoint> gold,
                                     std::span<const double> pool, std::size_t n,
                                     const AutoLabelOptions& options, const ProbClassifier* global_fallback,
                                     Rng& rng) {
    FallbackProvider provider = [global_fallback]() { return global_fallback; };
    return build_decision_set_impl(std::move(relation), std::move(gold), pool, n, options, provider, rng);
}

CalibrationResult calibrate_actc(const Dataset& dataset, const ActcConfig& config) {
    if (config.min_set_size == 0) {
        throw InputError("calibrate_actc: n must be at least 1");
    }
    CalibrationResult result;
    const std::size_t budget = std::min(config.budget, dataset.size());
    const auto scores = dataset.scores();

    SelectionStrategy strategy = config.strategy;
    strategy.seed = StableHash().add(config.seed).add("select").digest();
    result.selected = select(strategy, scores, budget);

    AnnotationOracle oracle(dataset, budget);
    std::vector<bool> is_gold(dataset.size(), false);
    std::map<RelationId, std::vector<LabeledPoint>> gold_by_rel;
    std::vector<LabeledPoint> gold_all;
    for (std::size_t idx : result.selected) {
        const bool label = oracle.annotate(idx);
        is_gold[idx] = true;
        const auto p = LabeledPoint::gold(scores[idx], label);
        gold_by_rel[dataset[idx].relation].push_back(p);
        gold_all.push_back(p);
    }
    result.spent = oracle.spent();

    const AutoLabelOptions options{config.classifier, config.label_mode, config.auto_extent};
    const std::size_t n = config.min_set_size;

    const auto finish = [&](const DecisionSetResult& built) -> std::optional<double> {
        if (built.degraded) ++result.degraded_sets;
        if (built.fallback) ++result.fallback_sets;
        DecisionSet searched = built.set;
        if (config.strict_pseudocode) {
            searched.points = gold_points_only(built.set.points);
        }
        if (searched.points.empty()) {
            return std::nullopt;
        }
        return estimate_threshold(searched, config.metric).threshold;
    };

    if (config.scope == Scope::Uniform) {
        std::vector<double> pool;
        for (std::size_t i = 0; i < dataset.size(); ++i) {
            if (!is_gold[i]) pool.push_back(scores[i]);
        }
        Rng rng(StableHash().add(config.seed).add("auto").add(std::string_view{}).digest());
        const auto built = build_decision_set_impl(std::nullopt, gold_all, pool, n, options, nullptr, rng);
        const auto tau = finish(built);
        if (tau) result.thresholds.default_threshold = *tau;
        return result;
    }

    std::map<RelationId, std::vector<double>> pool_by_rel;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        if (!is_gold[i]) pool_by_rel[dataset[i].relation].push_back(scores[i]);
    }

    std::optional<ProbClassifier> global;
    bool global_tried = false;
    const FallbackProvider provider = [&]() -> const ProbClassifier* {
        if (!global_tried) {
            global_tried = true;
            global = try_fit(config.classifier, gold_all);
        }
        return global ? &*global : nullptr;
    };

    for (const auto& rel : dataset.relations()) {
        auto gold_it = gold_by_rel.find(rel);
        std::vector<LabeledPoint> gold =
            gold_it == gold_by_rel.end() ? std::vector<LabeledPoint>{} : gold_it->second;
        const auto pool_it = pool_by_rel.find(rel);
        const std::span<const double> pool =
            pool_it == pool_by_rel.end() ? std::span<const double>{} : std::span<const double>(pool_it->second);
        Rng rng(StableHash().add(config.seed).add("auto").add(rel).digest());
        const auto built = build_decision_set_impl(rel, std::move(gold), pool, n, options, provider, rng);
        if (const auto tau = finish(built)) {
            result.thresholds.per_relation[rel] = *tau;
        }
    }
    return result;
}

ThresholdMap calibrate_local_opt(std::span<const ScoredTriple> gold, Metric metric, Scope scope) {
    ThresholdMap map;
    std::map<RelationId, DecisionSet> sets;
    DecisionSet all;
    for (const auto& t : gold) {
        if (!t.oracle_label) {
            throw InputError("calibrate_local_opt: unlabeled triple (" + t.head + ", " + t.relation + ", " +
                             t.tail + ")");
        }
        const auto p = LabeledPoint::gold(t.score, *t.oracle_label);
        sets[t.relation].points.push_back(p);
        all.points.push_back(p);
    }
    if (scope == Scope::Uniform) {
        if (!all.points.empty()) {
            map.default_threshold = estimate_threshold(all, metric).threshold;
        }
        return map;
    }
    for (auto& [rel, set] : sets) {
        set.relation = rel;
        map.per_relation[rel] = estimate_threshold(set, metric).threshold;
    }
    return map;
}

ThresholdMap calibrate_global_opt(std::span<const ScoredTriple> gold, std::size_t grid_steps) {
    if (grid_steps < 2) {
        throw InputError("calibrate_global_opt: grid_steps must be at least 2");
    }
    struct Sample {
        double prob;
        bool label;
    };
    std::map<RelationId, std::vector<Sample>> by_rel;
    for (const auto& t : gold) {
        if (!t.oracle_label) {
            throw InputError("calibrate_global_opt: unlabeled triple (" + t.head + ", " + t.relation + ", " +
                             t.tail + ")");
        }
        by_rel[t.relation].push_back({sigmoid(t.score), *t.oracle_label});
    }

    std::vector<double> grid(grid_steps);
    for (std::size_t k = 0; k < grid_steps; ++k) {
        grid[k] = static_cast<double>(k) / static_cast<double>(grid_steps - 1);
    }

    std::map<RelationId, double> current;  // sigmoid-space thresholds
    for (const auto& [rel, _] : by_rel) current[rel] = 0.5;

    struct Counts {
        double tp = 0, fp = 0, fn = 0;
    };
    const auto count_rel = [](const std::vector<Sample>& samples, double thr, Counts& c) {
        for (const auto& s : samples) {
            if (s.prob >= thr) {
                s.label ? ++c.tp : ++c.fp;
            } else if (s.label) {
                ++c.fn;
            }
        }
    };

    for (const auto& [rel, samples] : by_rel) {
        Counts others;
        for (const auto& [other, other_samples] : by_rel) {
            if (other != rel) count_rel(other_samples, current[other], others);
        }
        double best_f1 = -1.0;
        double best_thr = 0.5;
        for (double g : grid) {
            Counts c = others;
            count_rel(samples, g, c);
            const double f1 = f1_from_counts(c.tp, c.fp, c.fn);
            if (f1 > best_f1) {
                best_f1 = f1;
                best_thr = g;
            }
        }
        current[rel] = best_thr;
    }

    ThresholdMap map;
    map.default_threshold = logit(0.5);
    for (const auto& [rel, g] : current) {
        map.per_relation[rel] = logit(g);
    }
    return map;
}

Metrics evaluate_thresholds(const ThresholdMap& thresholds, const Dataset& test) {
    std::vector<bool> preds;
    std::vector<bool> gold;
    preds.reserve(test.size());
    gold.reserve(test.size());
    for (const auto& t : test.triples()) {
        if (!t.oracle_label) {
            throw InputError("evaluate: test triple (" + t.head + ", " + t.relation + ", " + t.tail +
                             ") has no label");
        }
        preds.push_back(classify(t.score, thresholds.lookup(t.relation)));
        gold.push_back(*t.oracle_label);
    }
    return compute_metrics(preds, gold);
}

}  // namespace threshcal
