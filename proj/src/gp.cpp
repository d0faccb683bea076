#include <algorithm>
#include <cmath>
#include <numbers>

#include "threshcal/classifiers.hpp"
#include "threshcal/data_io.hpp"
#include "threshcal/error.hpp"

namespace threshcal {

namespace {

constexpr double kGradTol = 1e-8;
constexpr int kMaxIter = 100;
constexpr double kMaxJitter = 1e-2;

struct Sites {
    Eigen::VectorXd grad;  // t - pi
    Eigen::VectorXd w;     // pi (1 - pi)
    double log_lik = 0.0;
};

Sites sites_at(const Eigen::VectorXd& f, const Eigen::VectorXd& t) {
    Sites s;
    const auto n = f.size();
    s.grad.resize(n);
    s.w.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double p = sigmoid(f(i));
        s.grad(i) = t(i) - p;
        s.w(i) = p * (1.0 - p);
        const double yf = (t(i) > 0.5 ? 1.0 : -1.0) * f(i);
        // log sigma(yf)
        s.log_lik += yf > 0.0 ? -std::log1p(std::exp(-yf)) : yf - std::log1p(std::exp(yf));
    }
    return s;
}

}  // namespace

GpPosterior fit_gp(std::span<const double> scores, const std::vector<bool>& labels,
                   const KernelSpec& spec, std::size_t cap) {
    validate(spec);
    if (scores.size() != labels.size()) {
        throw InputError("fit_gp: scores and labels differ in length");
    }
    if (scores.size() > cap) {
        throw InputError("fit_gp: " + std::to_string(scores.size()) + " training points exceed the cap of " +
                         std::to_string(cap));
    }
    const auto positives = std::count(labels.begin(), labels.end(), true);
    if (scores.size() < 2 || positives == 0 || positives == static_cast<std::ptrdiff_t>(labels.size())) {
        throw DegenerateLabels("fit_gp: need at least two points of both classes");
    }

    const auto n = static_cast<Eigen::Index>(scores.size());
    const Eigen::MatrixXd k0 = gram_matrix(spec, scores);

    GpPosterior post;
    post.train_scores.assign(scores.begin(), scores.end());
    post.kernel = spec;

    double jitter = spec.jitter;
    Eigen::MatrixXd k;
    while (true) {
        k = k0;
        k.diagonal().array() += jitter;
        Eigen::LLT<Eigen::MatrixXd> llt(k);
        if (llt.info() == Eigen::Success) {
            break;
        }
        jitter = jitter > 0.0 ? jitter * 10.0 : 1e-10;
        if (jitter > kMaxJitter) {
            throw NumericalError("fit_gp: Gram matrix not positive definite after jitter escalation");
        }
    }
    post.kernel.jitter = jitter;

    Eigen::VectorXd t(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        t(i) = labels[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
    }

    // Newton on f = K a. The gradient of the log posterior is (t - pi) - a.
    Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
    Sites sites = sites_at(f, t);
    double objective = -sites.log_lik;  // + 0.5 a'f = 0 at the start
    post.objective_trace.push_back(objective);

    int iter = 0;
    for (;; ++iter) {
        const double grad_norm = (sites.grad - a).lpNorm<Eigen::Infinity>();
        if (grad_norm <= kGradTol) {
            break;
        }
        if (iter == kMaxIter) {
            throw ConvergenceError("fit_gp: Laplace mode search did not converge", iter);
        }
        const Eigen::VectorXd sw = sites.w.array().sqrt();
        Eigen::MatrixXd b_mat = sw.asDiagonal() * k * sw.asDiagonal();
        b_mat.diagonal().array() += 1.0;
        Eigen::LLT<Eigen::MatrixXd> llt(b_mat);
        if (llt.info() != Eigen::Success) {
            throw NumericalError("fit_gp: Cholesky of I + W^1/2 K W^1/2 failed");
        }
        const Eigen::VectorXd b = sites.w.cwiseProduct(f) + sites.grad;
        const Eigen::VectorXd rhs = sw.cwiseProduct(k * b);
        const Eigen::VectorXd a_newton = b - sw.cwiseProduct(llt.solve(rhs));
        const Eigen::VectorXd da = a_newton - a;

        double step = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 50; ++ls) {
            const Eigen::VectorXd a_try = a + step * da;
            const Eigen::VectorXd f_try = k * a_try;
            const Sites s_try = sites_at(f_try, t);
            const double obj_try = -s_try.log_lik + 0.5 * a_try.dot(f_try);
            if (obj_try <= objective) {
                a = a_try;
                f = f_try;
                sites = s_try;
                objective = obj_try;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            // No representable decrease left: accept only if already at the optimum.
            if ((sites.grad - a).lpNorm<Eigen::Infinity>() <= kGradTol) {
                break;
            }
            throw ConvergenceError("fit_gp: line search stalled", iter + 1);
        }
        post.objective_trace.push_back(objective);
    }

    post.iterations = iter;
    post.mode = f;
    post.site_precisions = sites.w;
    post.log_lik_grad = sites.grad;
    const Eigen::VectorXd sw = sites.w.array().sqrt();
    Eigen::MatrixXd b_mat = sw.asDiagonal() * k * sw.asDiagonal();
    b_mat.diagonal().array() += 1.0;
    Eigen::LLT<Eigen::MatrixXd> llt(b_mat);
    post.chol_b = llt.matrixL();
    return post;
}

LatentPrediction predict_gp_latent(const GpPosterior& posterior, double score) {
    const auto n = static_cast<Eigen::Index>(posterior.train_scores.size());
    Eigen::VectorXd k_star(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        k_star(i) = kernel_eval(posterior.kernel, posterior.train_scores[static_cast<std::size_t>(i)], score);
    }
    LatentPrediction out;
    out.mean = k_star.dot(posterior.log_lik_grad);
    const Eigen::VectorXd sw = posterior.site_precisions.array().sqrt();
    const Eigen::VectorXd v =
        posterior.chol_b.triangularView<Eigen::Lower>().solve(sw.cwiseProduct(k_star));
    out.variance = std::max(0.0, 1.0 - v.squaredNorm());
    return out;
}

double predict_gp(const GpPosterior& posterior, double score) {
    const auto latent = predict_gp_latent(posterior, score);
    return sigmoid(latent.mean / std::sqrt(1.0 + std::numbers::pi * latent.variance / 8.0));
}

double ProbClassifier::predict(double score) const {
    return std::visit(
        [score](const auto& m) -> double {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, LogisticModel>) {
                return predict_logistic(m, score);
            } else {
                return predict_gp(m, score);
            }
        },
        model_);
}

ProbClassifier fit_classifier(const ClassifierConfig& config, std::span<const double> scores,
                              const std::vector<bool>& labels) {
    if (config.kind == ClassifierKind::LR) {
        return ProbClassifier(fit_logistic(scores, labels, config.inv_reg_c));
    }
    return ProbClassifier(fit_gp(scores, labels, config.kernel, config.gp_cap));
}

std::vector<LabeledPoint> auto_label(const ProbClassifier& classifier, std::span<const double> scores,
                                     LabelMode mode) {
    std::vector<LabeledPoint> out;
    out.reserve(scores.size());
    for (double s : scores) {
        const double p = classifier.predict(s);
        const double w = mode == LabelMode::Hard ? (p >= 0.5 ? 1.0 : 0.0) : p;
        out.push_back(LabeledPoint::automatic(s, w));
    }
    return out;
}

}  // namespace threshcal
