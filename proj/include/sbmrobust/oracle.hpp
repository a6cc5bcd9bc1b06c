#pragma once

#include "sbmrobust/blockmodel.hpp"
#include "sbmrobust/percolation.hpp"
#include "sbmrobust/variation.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace sbmrobust {

/*
 * Finite realization of a block model: a simple undirected graph whose
 * nodes carry block labels. Nodes of block r occupy a contiguous index
 * range starting at block_start[r].
 */
struct SampledNetwork {
    std::size_t N = 0;
    std::vector<int> block_of;
    std::vector<std::size_t> block_sizes;
    std::vector<std::size_t> block_start;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;  // first < second

    /// Stubs left unmatched in each (r, s) bucket, row-major B x B.
    std::vector<std::size_t> discarded_stubs;
    std::size_t self_loops_removed = 0;
    std::size_t multi_edges_removed = 0;

    int blocks() const { return static_cast<int>(block_sizes.size()); }
    std::vector<std::size_t> degrees() const;
    /// Mean realized degree of block r (0 for empty blocks).
    double block_mean_degree(int r) const;
};

/// Node counts per block: largest-remainder rounding of N n_r.
std::vector<std::size_t> apportion(const Eigen::VectorXd& fractions, std::size_t total);

/// One degree from the zero-truncated Poisson distribution with parameter c.
int draw_modified_poisson(double c, Rng& rng);

/*
 * Configuration-model sample. Degrees come from the modified Poisson of
 * each block, every stub picks a target block from its mixing row, stubs
 * are paired uniformly inside each block pair and the surplus of the larger
 * side is dropped. Self-loops and repeated edges are removed afterwards.
 * Throws InvalidModel for invalid models and std::invalid_argument for
 * N < 1000.
 */
SampledNetwork sample_network(const BlockModel& model, std::size_t N, Rng& rng);

/// Nodes to remove from each block for the survival fractions `phi`:
/// round(qN) in total, split in proportion to N_r (1 - phi_r).
std::vector<std::size_t> removal_counts(const SampledNetwork& network, const PhiVector& phi);

struct Estimate {
    double mean = 0.0;
    double error = 0.0;  // standard error
};

/*
 * Largest connected component fraction after removing the nodes given by
 * removal_counts, drawn uniformly within each block. Mean and standard
 * error over independent trials.
 */
Estimate mc_giant(const SampledNetwork& network, const BlockModel& model, Schedule schedule,
                  double q, Rng& rng, int trials);

struct McCurve {
    std::vector<double> q_grid;
    std::vector<Estimate> giant;
    Estimate robustness;
};

/// Fresh network per trial; each trial gives one S(q) curve and one
/// Simpson estimate of R, and the errors are taken across trials.
McCurve mc_robustness(const BlockModel& model, Schedule schedule, std::size_t N, int grid_size,
                      int trials, Rng& rng);

}  // namespace sbmrobust
