#include <algorithm>
#include <cmath>

#include "threshcal/classifiers.hpp"
#include "threshcal/data_io.hpp"
#include "threshcal/error.hpp"

namespace threshcal {

namespace {

constexpr double kGradTol = 1e-8;
constexpr int kMaxIter = 100;

// log(1 + exp(t)) without overflow.
double softplus(double t) noexcept {
    return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

void check_inputs(std::span<const double> scores, const std::vector<bool>& labels) {
    if (scores.size() != labels.size()) {
        throw InputError("fit_logistic: scores and labels differ in length");
    }
    const auto positives = std::count(labels.begin(), labels.end(), true);
    if (scores.size() < 2 || positives == 0 || positives == static_cast<std::ptrdiff_t>(labels.size())) {
        throw DegenerateLabels("fit_logistic: need at least two points of both classes");
    }
}

}  // namespace

double logistic_objective(double weight, double bias, std::span<const double> scores,
                          const std::vector<bool>& labels, double inv_reg_c) {
    double loss = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const double y = labels[i] ? 1.0 : -1.0;
        loss += softplus(-y * (weight * scores[i] + bias));
    }
    return 0.5 * weight * weight + inv_reg_c * loss;
}

std::array<double, 2> logistic_gradient(double weight, double bias, std::span<const double> scores,
                                        const std::vector<bool>& labels, double inv_reg_c) {
    double gw = 0.0;
    double gb = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const double y = labels[i] ? 1.0 : -1.0;
        // d/dz softplus(-y z) = -y sigma(-y z)
        const double r = -y * sigmoid(-y * (weight * scores[i] + bias));
        gw += r * scores[i];
        gb += r;
    }
    return {weight + inv_reg_c * gw, inv_reg_c * gb};
}

LogisticModel fit_logistic(std::span<const double> scores, const std::vector<bool>& labels,
                           double inv_reg_c) {
    if (!(inv_reg_c > 0.0)) {
        throw InputError("fit_logistic: inverse regularization strength must be positive");
    }
    check_inputs(scores, labels);

    double w = 0.0;
    double b = 0.0;
    double obj = logistic_objective(w, b, scores, labels, inv_reg_c);
    for (int iter = 0; iter < kMaxIter; ++iter) {
        const auto g = logistic_gradient(w, b, scores, labels, inv_reg_c);
        if (std::max(std::abs(g[0]), std::abs(g[1])) <= kGradTol) {
            return {w, b, inv_reg_c};
        }
        double hww = 1.0;
        double hwb = 0.0;
        double hbb = 0.0;
        for (double s : scores) {
            const double p = sigmoid(w * s + b);
            const double v = inv_reg_c * p * (1.0 - p);
            hww += v * s * s;
            hwb += v * s;
            hbb += v;
        }
        // Tiny ridge on the bias block keeps the 2x2 solve defined when every
        // point sits deep in the saturated tail.
        hbb += 1e-12 * (1.0 + hww);
        const double det = hww * hbb - hwb * hwb;
        double dw = -(hbb * g[0] - hwb * g[1]) / det;
        double db = -(-hwb * g[0] + hww * g[1]) / det;
        if (!std::isfinite(dw) || !std::isfinite(db)) {
            dw = -g[0];
            db = -g[1];
        }

        const double slope = g[0] * dw + g[1] * db;
        double step = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            const double nw = w + step * dw;
            const double nb = b + step * db;
            const double nobj = logistic_objective(nw, nb, scores, labels, inv_reg_c);
            if (nobj <= obj + 1e-4 * step * slope + 1e-13 * std::abs(obj)) {
                w = nw;
                b = nb;
                obj = nobj;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            throw ConvergenceError("fit_logistic: line search failed", iter + 1);
        }
    }
    const auto g = logistic_gradient(w, b, scores, labels, inv_reg_c);
    if (std::max(std::abs(g[0]), std::abs(g[1])) <= kGradTol) {
        return {w, b, inv_reg_c};
    }
    throw ConvergenceError("fit_logistic: gradient above tolerance", kMaxIter);
}

double predict_logistic(const LogisticModel& model, double score) noexcept {
    return sigmoid(model.weight * score + model.bias);
}

}  // namespace threshcal
