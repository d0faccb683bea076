#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "threshcal/data_io.hpp"

namespace threshcal {

enum class SelectionKind : std::uint8_t { Random, Density, Uncertainty, DensityWeightedUncertainty };

/// Which end of the density ranking to take. Max follows the "top samples
/// with maximal density" rule; Min takes the samples closest to the others.
enum class DensityOrder : std::uint8_t { Max, Min };

struct SelectionStrategy {
    SelectionKind kind = SelectionKind::Random;
    std::uint64_t seed = 0;  // Random only
    DensityOrder density_order = DensityOrder::Max;
};

/// min(budget, count) distinct indices in [0, count), uniform without
/// replacement (partial Fisher-Yates over Rng(seed)).
std::vector<std::size_t> select_random(std::size_t count, std::size_t budget, std::uint64_t seed);

/// d_i = sum_j (s_j - s_i)^2 in O(N), through the identity
/// d_i = N c_i^2 - 2 c_i C1 + C2 on scores pivoted by the first score
/// (c_i = s_i - s_0, C1 = sum c, C2 = sum c^2).
std::vector<double> density_scores(std::span<const double> scores);

/// Indices of the `budget` largest keys, ties to the smaller index.
std::vector<std::size_t> top_indices(std::span<const double> keys, std::size_t budget);

std::vector<std::size_t> select_density(std::span<const double> scores, std::size_t budget,
                                        DensityOrder order = DensityOrder::Max);

/// Smallest |sigmoid(s) - 0.5| first.
std::vector<std::size_t> select_uncertainty(std::span<const double> scores, std::size_t budget);

/// Per-sample weights dnorm_i * u_i with dnorm = d / max d (1 when max d is 0)
/// and u = 1 - 2 |sigmoid(s) - 0.5|.
std::vector<double> density_weighted_uncertainty(std::span<const double> scores);

std::vector<std::size_t> select_density_weighted_uncertainty(std::span<const double> scores,
                                                             std::size_t budget);

/// Dispatches on the strategy kind. Non-random kinds ignore the seed.
std::vector<std::size_t> select(const SelectionStrategy& strategy, std::span<const double> scores,
                                std::size_t budget);

SelectionKind parse_selection_kind(std::string_view name);
std::string_view to_string(SelectionKind kind);

}  // namespace threshcal
