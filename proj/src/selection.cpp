#include "threshcal/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "threshcal/error.hpp"
#include "threshcal/rng.hpp"

namespace threshcal {

std::vector<std::size_t> select_random(std::size_t count, std::size_t budget, std::uint64_t seed) {
    const std::size_t take = std::min(budget, count);
    std::vector<std::size_t> idx(count);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng(seed);
    for (std::size_t i = 0; i < take; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(count - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(take);
    return idx;
}

std::vector<double> density_scores(std::span<const double> scores) {
    std::vector<double> out(scores.size(), 0.0);
    if (scores.empty()) {
        return out;
    }
    const double pivot = scores.front();
    double c1 = 0.0;
    double c2 = 0.0;
    for (double s : scores) {
        const double c = s - pivot;
        c1 += c;
        c2 += c * c;
    }
    const double count = static_cast<double>(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const double c = scores[i] - pivot;
        out[i] = std::max(0.0, count * c * c - 2.0 * c * c1 + c2);
    }
    return out;
}

std::vector<std::size_t> top_indices(std::span<const double> keys, std::size_t budget) {
    const std::size_t take = std::min(budget, keys.size());
    std::vector<std::size_t> idx(keys.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(take), idx.end(),
                      [&](std::size_t a, std::size_t b) {
                          if (keys[a] != keys[b]) return keys[a] > keys[b];
                          return a < b;
                      });
    idx.resize(take);
    return idx;
}

std::vector<std::size_t> select_density(std::span<const double> scores, std::size_t budget,
                                        DensityOrder order) {
    auto keys = density_scores(scores);
    if (order == DensityOrder::Min) {
        for (double& k : keys) k = -k;
    }
    return top_indices(keys, budget);
}

std::vector<std::size_t> select_uncertainty(std::span<const double> scores, std::size_t budget) {
    std::vector<double> keys;
    keys.reserve(scores.size());
    for (double s : scores) {
        keys.push_back(-std::abs(sigmoid(s) - 0.5));
    }
    return top_indices(keys, budget);
}

std::vector<double> density_weighted_uncertainty(std::span<const double> scores) {
    const auto density = density_scores(scores);
    const double max_d = density.empty() ? 0.0 : *std::max_element(density.begin(), density.end());
    std::vector<double> w;
    w.reserve(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const double dnorm = max_d > 0.0 ? density[i] / max_d : 1.0;
        const double u = 1.0 - 2.0 * std::abs(sigmoid(scores[i]) - 0.5);
        w.push_back(dnorm * u);
    }
    return w;
}

std::vector<std::size_t> select_density_weighted_uncertainty(std::span<const double> scores,
                                                             std::size_t budget) {
    return top_indices(density_weighted_uncertainty(scores), budget);
}

std::vector<std::size_t> select(const SelectionStrategy& strategy, std::span<const double> scores,
                                std::size_t budget) {
    switch (strategy.kind) {
        case SelectionKind::Random:
            return select_random(scores.size(), budget, strategy.seed);
        case SelectionKind::Density:
            return select_density(scores, budget, strategy.density_order);
        case SelectionKind::Uncertainty:
            return select_uncertainty(scores, budget);
        case SelectionKind::DensityWeightedUncertainty:
            return select_density_weighted_uncertainty(scores, budget);
    }
    return {};
}

SelectionKind parse_selection_kind(std::string_view name) {
    if (name == "random" || name == "rndm") return SelectionKind::Random;
    if (name == "density" || name == "dens") return SelectionKind::Density;
    if (name == "uncertainty" || name == "unc") return SelectionKind::Uncertainty;
    if (name == "dwu") return SelectionKind::DensityWeightedUncertainty;
    throw InputError("unknown selection strategy '" + std::string(name) + "'");
}

std::string_view to_string(SelectionKind kind) {
    switch (kind) {
        case SelectionKind::Random: return "random";
        case SelectionKind::Density: return "density";
        case SelectionKind::Uncertainty: return "uncertainty";
        case SelectionKind::DensityWeightedUncertainty: return "dwu";
    }
    return "?";
}

}  // namespace threshcal
