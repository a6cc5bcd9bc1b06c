#pragma once

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sbmrobust {

/// Smallest admissible block mean degree. Below it the modified Poisson
/// parameter approaches its singular limit c -> 0.
inline constexpr double kMinBlockDegree = 1.0 + 1e-6;

/// Blocks smaller than this are treated as absent by consumers.
inline constexpr double kAbsentBlockSize = 1e-10;

class InvalidModel : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/*
 * Intensive parametrization of a block-model ensemble.
 *
 * sizes()(r) is the fraction of nodes in block r. edges()(r, s) counts the
 * half-edges running between blocks r and s per node of the whole network,
 * with the diagonal holding twice the internal edges of block r. The matrix
 * is symmetric, so the block mean degree is kappa_r = sum_s e_rs / n_r and
 * the network mean degree is sum_rs e_rs.
 *
 * The constructor only checks shapes and exact symmetry; content is checked
 * by validate(). Block degrees are always derived from n and e.
 */
class BlockModel {
public:
    BlockModel(Eigen::VectorXd sizes, Eigen::MatrixXd edges);

    /// One block of mean degree `kappa`.
    static BlockModel single_block(double kappa);

    int blocks() const { return static_cast<int>(sizes_.size()); }
    const Eigen::VectorXd& sizes() const { return sizes_; }
    const Eigen::MatrixXd& edges() const { return edges_; }

    double size(int r) const { return sizes_(r); }
    double edge(int r, int s) const { return edges_(r, s); }

    /// Half-edges leaving block r per network node, n_r * kappa_r.
    double block_edge_mass(int r) const { return edges_.row(r).sum(); }
    double block_degree(int r) const { return block_edge_mass(r) / sizes_(r); }
    Eigen::VectorXd block_degrees() const;
    double mean_degree() const { return edges_.sum(); }

    bool operator==(const BlockModel& other) const;

private:
    Eigen::VectorXd sizes_;
    Eigen::MatrixXd edges_;
};

struct Violation {
    enum class Severity { Warning, Error };

    Severity severity;
    std::string field;
    std::optional<int> block;
    std::string message;
};

/// Every violated invariant, errors and warnings alike. Empty iff the model
/// satisfies all invariants.
std::vector<Violation> validate(const BlockModel& model);

bool is_valid(const BlockModel& model);

/// Throws InvalidModel listing all errors when the model is not valid.
void require_valid(const BlockModel& model);

std::string describe(const std::vector<Violation>& violations);

// Modified (zero-truncated) Poisson degree distribution with parameter c.

/// <k> = c / (1 - e^{-c})
double modified_poisson_mean(double c);

/// Inverse of modified_poisson_mean. Throws std::domain_error for
/// mean_degree <= 1.
double poisson_param_from_mean(double mean_degree);

/// p_k for k >= 0 (p_0 = 0).
double modified_poisson_pmf(double c, int k);

/// Generating function g0(z) = (e^{cz} - 1) / (e^c - 1), overflow-safe.
double g0(double c, double z);

/// Excess-degree generating function g0'(z) / g0'(1) = e^{c(z-1)}.
double g1(double c, double z);

/// Modified Poisson parameter of every block.
Eigen::VectorXd poisson_params(const BlockModel& model);

/// m_rs = e_rs / (n_r kappa_r), fraction of block-r edges ending in block s.
Eigen::MatrixXd mixing_matrix(const BlockModel& model);

/// Merge blocks a and b into one placed at min(a, b). Throws InvalidModel if
/// the merged block degree falls below the feasibility floor.
BlockModel merge_blocks(const BlockModel& model, int a, int b);

}  // namespace sbmrobust
