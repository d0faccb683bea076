#include <cmath>
#include <string>

#include "threshcal/classifiers.hpp"
#include "threshcal/error.hpp"

namespace threshcal {

void validate(const KernelSpec& spec) {
    if (!(spec.length_scale > 0.0) || !std::isfinite(spec.length_scale)) {
        throw InputError("kernel: length_scale must be positive and finite");
    }
    if (spec.kind == KernelKind::Matern && !(spec.nu > 0.0 && std::isfinite(spec.nu))) {
        throw InputError("kernel: Matern nu must be positive and finite");
    }
    if (spec.kind == KernelKind::RationalQuadratic && !(spec.alpha > 0.0 && std::isfinite(spec.alpha))) {
        throw InputError("kernel: RationalQuadratic alpha must be positive and finite");
    }
    if (!(spec.jitter >= 0.0)) {
        throw InputError("kernel: jitter must be non-negative");
    }
}

double matern_bessel(double nu, double length_scale, double distance) {
    const double z = std::sqrt(2.0 * nu) * std::abs(distance) / length_scale;
    if (z == 0.0) {
        return 1.0;
    }
    if (z > 700.0) {
        return 0.0;
    }
    // log form keeps z^nu and 1/Gamma(nu) in range for large nu
    const double log_k = (1.0 - nu) * std::log(2.0) - std::lgamma(nu) + nu * std::log(z) +
                         std::log(std::cyl_bessel_k(nu, z));
    return std::exp(log_k);
}

double matern_closed_form(double nu, double length_scale, double distance) {
    const double r = std::abs(distance) / length_scale;
    if (nu == 0.5) {
        return std::exp(-r);
    }
    if (nu == 1.5) {
        const double a = std::sqrt(3.0) * r;
        return (1.0 + a) * std::exp(-a);
    }
    if (nu == 2.5) {
        const double a = std::sqrt(5.0) * r;
        return (1.0 + a + a * a / 3.0) * std::exp(-a);
    }
    throw InputError("matern_closed_form: no closed form for nu = " + std::to_string(nu));
}

double kernel_eval(const KernelSpec& spec, double x, double y) {
    validate(spec);
    const double d = std::abs(x - y);
    const double l = spec.length_scale;
    switch (spec.kind) {
        case KernelKind::RBF:
            return std::exp(-d * d / (2.0 * l * l));
        case KernelKind::Matern:
            if (spec.nu == 0.5 || spec.nu == 1.5 || spec.nu == 2.5) {
                return matern_closed_form(spec.nu, l, d);
            }
            return matern_bessel(spec.nu, l, d);
        case KernelKind::RationalQuadratic:
            return std::pow(1.0 + d * d / (2.0 * spec.alpha * l * l), -spec.alpha);
    }
    return 0.0;
}

Eigen::MatrixXd gram_matrix(const KernelSpec& spec, std::span<const double> scores) {
    const auto n = static_cast<Eigen::Index>(scores.size());
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        k(i, i) = 1.0;
        for (Eigen::Index j = 0; j < i; ++j) {
            const double v = kernel_eval(spec, scores[static_cast<std::size_t>(i)],
                                         scores[static_cast<std::size_t>(j)]);
            k(i, j) = v;
            k(j, i) = v;
        }
    }
    return k;
}

KernelKind parse_kernel_kind(std::string_view name) {
    if (name == "rbf") return KernelKind::RBF;
    if (name == "matern") return KernelKind::Matern;
    if (name == "rq") return KernelKind::RationalQuadratic;
    throw InputError("unknown kernel '" + std::string(name) + "'");
}

}  // namespace threshcal
