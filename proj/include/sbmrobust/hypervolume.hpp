#pragma once

#include "sbmrobust/percolation.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace sbmrobust {

/// Objective pair (R_targeted, R_random); both are maximized.
using Objectives = RobustnessPair;

/// a dominates b: no worse in both objectives and not equal.
bool dominates(const Objectives& a, const Objectives& b);

struct HypervolumeResult {
    double value = 0.0;
    /// Points that did not strictly dominate the reference; they were
    /// clamped onto it and contributed nothing.
    std::size_t clamped = 0;
};

/// Area of the union of boxes [reference, p] over all points (maximization).
/// Sort-and-sweep, O(n log n).
HypervolumeResult hypervolume_2d(std::span<const Objectives> points, const Objectives& reference);

/// hypervolume(points) - hypervolume(points without `index`).
double hv_contribution(std::span<const Objectives> points, std::size_t index,
                       const Objectives& reference);

/// Contributions of all points at once, O(n^2).
std::vector<double> hv_contributions(std::span<const Objectives> points, const Objectives& reference);

/// Non-dominated sorting; fronts[0] holds the indices of rank-1 points.
std::vector<std::vector<std::size_t>> nondominated_fronts(std::span<const Objectives> points);

}  // namespace sbmrobust
