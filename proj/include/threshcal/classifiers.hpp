#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "threshcal/core.hpp"

namespace threshcal {

// ---------------------------------------------------------------------------
// Logistic regression on the scalar score
// ---------------------------------------------------------------------------

struct LogisticModel {
    double weight = 0.0;
    double bias = 0.0;
    double inv_reg_c = 100.0;
};

/// Penalized objective 0.5 w^2 + C sum log(1 + exp(-y_i (w s_i + b))), labels
/// mapped to y in {-1, +1}. The bias is not penalized.
double logistic_objective(double weight, double bias, std::span<const double> scores,
                          const std::vector<bool>& labels, double inv_reg_c);

/// Analytic gradient of logistic_objective as {d/dw, d/db}.
std::array<double, 2> logistic_gradient(double weight, double bias, std::span<const double> scores,
                                        const std::vector<bool>& labels, double inv_reg_c);

/// Damped Newton to gradient inf-norm <= 1e-8, at most 100 iterations.
/// Throws DegenerateLabels for single-class input, ConvergenceError otherwise.
LogisticModel fit_logistic(std::span<const double> scores, const std::vector<bool>& labels,
                           double inv_reg_c = 100.0);

double predict_logistic(const LogisticModel& model, double score) noexcept;

// ---------------------------------------------------------------------------
// Kernels
// ---------------------------------------------------------------------------

enum class KernelKind : std::uint8_t { RBF, Matern, RationalQuadratic };

struct KernelSpec {
    KernelKind kind = KernelKind::Matern;
    double length_scale = 0.1;
    double nu = 1.5;      // Matern only
    double alpha = 1.0;   // RationalQuadratic only
    double jitter = 1e-8; // added to the Gram diagonal
};

/// Throws InputError when a parameter is out of range.
void validate(const KernelSpec& spec);

/// Unit-variance kernel value at distance |x - y|.
double kernel_eval(const KernelSpec& spec, double x, double y);

/// General Matern form 2^(1-nu)/Gamma(nu) * z^nu * K_nu(z), z = sqrt(2 nu) d / l,
/// with value 1 at d = 0.
double matern_bessel(double nu, double length_scale, double distance);

/// Closed forms for nu in {0.5, 1.5, 2.5}. Throws InputError for other nu.
double matern_closed_form(double nu, double length_scale, double distance);

Eigen::MatrixXd gram_matrix(const KernelSpec& spec, std::span<const double> scores);

KernelKind parse_kernel_kind(std::string_view name);

// ---------------------------------------------------------------------------
// Gaussian-process classifier, Laplace approximation
// ---------------------------------------------------------------------------

struct GpPosterior {
    std::vector<double> train_scores;
    KernelSpec kernel;              // jitter holds the value actually used
    Eigen::VectorXd mode;           // Laplace mode f
    Eigen::VectorXd site_precisions;// W = pi (1 - pi) at the mode
    Eigen::VectorXd log_lik_grad;   // t - pi at the mode
    Eigen::MatrixXd chol_b;         // lower Cholesky factor of I + W^1/2 K W^1/2
    std::vector<double> objective_trace;  // negative log posterior after each accepted step
    int iterations = 0;
};

inline constexpr std::size_t kDefaultGpCap = 2000;

/// Newton search for the mode of the Bernoulli-logit GP posterior, stopping at
/// gradient inf-norm <= 1e-8 (max 100 iterations). Jitter escalates x10 up to
/// 1e-2 when the Gram matrix is not positive definite.
GpPosterior fit_gp(std::span<const double> scores, const std::vector<bool>& labels,
                   const KernelSpec& spec, std::size_t cap = kDefaultGpCap);

struct LatentPrediction {
    double mean = 0.0;
    double variance = 0.0;
};

LatentPrediction predict_gp_latent(const GpPosterior& posterior, double score);

/// sigma(mean / sqrt(1 + pi var / 8)).
double predict_gp(const GpPosterior& posterior, double score);

// ---------------------------------------------------------------------------
// Auto-labeling
// ---------------------------------------------------------------------------

enum class ClassifierKind : std::uint8_t { LR, GP };
enum class LabelMode : std::uint8_t { Hard, Soft };

struct ClassifierConfig {
    ClassifierKind kind = ClassifierKind::LR;
    double inv_reg_c = 100.0;
    KernelSpec kernel;
    std::size_t gp_cap = kDefaultGpCap;
};

/// A fitted score -> P(positive) map.
class ProbClassifier {
public:
    explicit ProbClassifier(LogisticModel model) : model_(std::move(model)) {}
    explicit ProbClassifier(GpPosterior posterior) : model_(std::move(posterior)) {}

    double predict(double score) const;

    const std::variant<LogisticModel, GpPosterior>& model() const noexcept { return model_; }

private:
    std::variant<LogisticModel, GpPosterior> model_;
};

ProbClassifier fit_classifier(const ClassifierConfig& config, std::span<const double> scores,
                              const std::vector<bool>& labels);

/// Hard: weight 1 iff p >= 0.5. Soft: weight p. Provenance Auto.
std::vector<LabeledPoint> auto_label(const ProbClassifier& classifier, std::span<const double> scores,
                                     LabelMode mode);

}  // namespace threshcal
