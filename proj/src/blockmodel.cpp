#include "sbmrobust/blockmodel.hpp"

#include <cmath>
#include <sstream>
#include <utility>

namespace sbmrobust {

BlockModel::BlockModel(Eigen::VectorXd sizes, Eigen::MatrixXd edges)
    : sizes_(std::move(sizes)), edges_(std::move(edges))
{
    if (sizes_.size() < 1)
        throw InvalidModel("B: a block model needs at least one block");
    if (edges_.rows() != sizes_.size() || edges_.cols() != sizes_.size())
        throw InvalidModel("e: edge matrix must be B x B with B = " +
                           std::to_string(sizes_.size()));
    for (Eigen::Index r = 0; r < edges_.rows(); ++r)
        for (Eigen::Index s = r + 1; s < edges_.cols(); ++s)
            if (edges_(r, s) != edges_(s, r))
                throw InvalidModel("e: edge matrix is not symmetric at (" + std::to_string(r) +
                                   ", " + std::to_string(s) + ")");
}

BlockModel BlockModel::single_block(double kappa)
{
    return BlockModel(Eigen::VectorXd::Ones(1), Eigen::MatrixXd::Constant(1, 1, kappa));
}

Eigen::VectorXd BlockModel::block_degrees() const
{
    return edges_.rowwise().sum().cwiseQuotient(sizes_);
}

bool BlockModel::operator==(const BlockModel& other) const
{
    return sizes_.size() == other.sizes_.size() && sizes_ == other.sizes_ &&
           edges_ == other.edges_;
}

std::vector<Violation> validate(const BlockModel& model)
{
    std::vector<Violation> out;
    const auto error = [&](std::string field, std::optional<int> block, std::string msg) {
        out.push_back({Violation::Severity::Error, std::move(field), block, std::move(msg)});
    };

    const int B = model.blocks();
    const double total = model.sizes().sum();
    if (!(std::abs(total - 1.0) <= 1e-12)) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "block sizes sum to " << total << ", expected 1";
        error("n", std::nullopt, msg.str());
    }
    for (int r = 0; r < B; ++r) {
        const double n = model.size(r);
        if (!(n > 0.0)) {
            error("n", r, "n_" + std::to_string(r) + " = " + std::to_string(n) + " is not positive");
        } else if (n < kAbsentBlockSize) {
            out.push_back({Violation::Severity::Warning, "n", r,
                           "n_" + std::to_string(r) + " below " + std::to_string(kAbsentBlockSize) +
                               ", block treated as absent"});
        }
        for (int s = 0; s < B; ++s) {
            if (!(model.edge(r, s) >= 0.0))
                error("e", r,
                      "e_" + std::to_string(r) + std::to_string(s) + " is negative or not a number");
        }
    }
    for (int r = 0; r < B; ++r) {
        if (!(model.size(r) > 0.0)) continue;
        const double kappa = model.block_degree(r);
        if (!(kappa > 1.0)) {
            std::ostringstream msg;
            msg << "kappa_" << r << " = " << kappa << " <= 1";
            error("e", r, msg.str());
        } else if (kappa < kMinBlockDegree) {
            std::ostringstream msg;
            msg.precision(12);
            msg << "kappa_" << r << " = " << kappa << " below feasibility floor " << kMinBlockDegree;
            error("e", r, msg.str());
        }
    }
    return out;
}

bool is_valid(const BlockModel& model)
{
    for (const auto& v : validate(model))
        if (v.severity == Violation::Severity::Error) return false;
    return true;
}

std::string describe(const std::vector<Violation>& violations)
{
    std::string text;
    for (const auto& v : violations) {
        text += v.severity == Violation::Severity::Error ? "error" : "warning";
        text += " [" + v.field;
        if (v.block) text += ", block " + std::to_string(*v.block);
        text += "]: " + v.message + "\n";
    }
    return text;
}

void require_valid(const BlockModel& model)
{
    if (!is_valid(model)) throw InvalidModel("invalid block model\n" + describe(validate(model)));
}

double modified_poisson_mean(double c)
{
    if (c < 1e-300) return 1.0;
    return c / -std::expm1(-c);
}

double poisson_param_from_mean(double mean_degree)
{
    if (!(mean_degree > 1.0))
        throw std::domain_error("modified Poisson mean degree must exceed 1, got " +
                                std::to_string(mean_degree));
    // mean(c) is increasing with mean(0+) = 1 and mean(c) > c, so the root
    // lies in (0, mean_degree).
    double lo = 0.0;
    double hi = mean_degree;
    for (int i = 0; i < 2000; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (modified_poisson_mean(mid) < mean_degree)
            lo = mid;
        else
            hi = mid;
    }
    const double err_lo = std::abs(modified_poisson_mean(lo) - mean_degree);
    const double err_hi = std::abs(modified_poisson_mean(hi) - mean_degree);
    return err_lo < err_hi ? lo : hi;
}

double modified_poisson_pmf(double c, int k)
{
    if (k <= 0) return 0.0;
    // log of e^c - 1
    const double log_norm = c > 1.0 ? c + std::log1p(-std::exp(-c)) : std::log(std::expm1(c));
    return std::exp(k * std::log(c) - std::lgamma(k + 1.0) - log_norm);
}

double g0(double c, double z)
{
    return std::exp(c * (z - 1.0)) * (-std::expm1(-c * z)) / (-std::expm1(-c));
}

double g1(double c, double z)
{
    return std::exp(c * (z - 1.0));
}

Eigen::VectorXd poisson_params(const BlockModel& model)
{
    const Eigen::VectorXd kappa = model.block_degrees();
    Eigen::VectorXd c(kappa.size());
    for (Eigen::Index r = 0; r < kappa.size(); ++r) c(r) = poisson_param_from_mean(kappa(r));
    return c;
}

Eigen::MatrixXd mixing_matrix(const BlockModel& model)
{
    const Eigen::VectorXd mass = model.edges().rowwise().sum();
    return mass.cwiseInverse().asDiagonal() * model.edges();
}

BlockModel merge_blocks(const BlockModel& model, int a, int b)
{
    const int B = model.blocks();
    if (a == b || a < 0 || b < 0 || a >= B || b >= B)
        throw std::invalid_argument("merge_blocks: need two distinct block indices in [0, B)");
    if (a > b) std::swap(a, b);

    // old index -> new index; b folds into a
    std::vector<int> target(B);
    for (int r = 0, next = 0; r < B; ++r) target[r] = r == b ? target[a] : next++;

    Eigen::VectorXd n = Eigen::VectorXd::Zero(B - 1);
    Eigen::MatrixXd e = Eigen::MatrixXd::Zero(B - 1, B - 1);
    for (int r = 0; r < B; ++r) {
        n(target[r]) += model.size(r);
        for (int s = 0; s < B; ++s) e(target[r], target[s]) += model.edge(r, s);
    }
    BlockModel merged(std::move(n), std::move(e));
    const double kappa = merged.block_degree(target[a]);
    if (!(kappa >= kMinBlockDegree))
        throw InvalidModel("merged block degree " + std::to_string(kappa) + " is not feasible");
    return merged;
}

}  // namespace sbmrobust
