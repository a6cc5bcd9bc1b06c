#include "sbmrobust/entropy.hpp"

#include <cmath>
#include <stdexcept>

namespace sbmrobust {

double entropy_density(const BlockModel& model)
{
    const Eigen::VectorXd mass = model.edges().rowwise().sum();
    double s = 0.0;
    for (int r = 0; r < model.blocks(); ++r) {
        for (int t = 0; t < model.blocks(); ++t) {
            const double e = model.edge(r, t);
            if (e > 0.0) s -= 0.5 * e * std::log(e / (mass(r) * mass(t)));
        }
    }
    return s;
}

double merge_gain(const BlockModel& model, int a, int b)
{
    return entropy_density(merge_blocks(model, a, b)) - entropy_density(model);
}

nlohmann::json to_json(const ReductionReport& report)
{
    nlohmann::json merges = nlohmann::json::array();
    for (const auto& m : report.merges)
        merges.push_back({{"blocks", {m.a, m.b}}, {"delta_s", m.gain}});
    nlohmann::json dropped = nlohmann::json::array();
    for (const auto& d : report.dropped) dropped.push_back({{"block", d.block}, {"n", d.size}});
    return {{"original_B", report.original_blocks},
            {"reduced_B", report.reduced_blocks},
            {"epsilon", report.threshold},
            {"merges", std::move(merges)},
            {"dropped", std::move(dropped)},
            {"entropy_before", report.entropy_before},
            {"entropy_after", report.entropy_after}};
}

BlockModel drop_negligible(const BlockModel& model, std::vector<DropRecord>& dropped)
{
    std::vector<int> keep;
    for (int r = 0; r < model.blocks(); ++r) {
        const double n = model.size(r);
        if (n < kNegligibleBlock && model.block_edge_mass(r) < kNegligibleBlock)
            dropped.push_back({r, n});
        else
            keep.push_back(r);
    }
    if (dropped.empty()) return model;
    if (keep.empty()) {
        // only reachable for models whose sizes do not sum to one
        dropped.clear();
        return model;
    }

    const auto K = static_cast<Eigen::Index>(keep.size());
    Eigen::VectorXd n(K);
    Eigen::MatrixXd e(K, K);
    for (Eigen::Index i = 0; i < K; ++i) {
        n(i) = model.size(keep[i]);
        for (Eigen::Index j = 0; j < K; ++j) e(i, j) = model.edge(keep[i], keep[j]);
    }
    n /= n.sum();
    e *= model.mean_degree() / e.sum();
    return BlockModel(std::move(n), std::move(e));
}

std::pair<BlockModel, ReductionReport> reduce(const BlockModel& model, double threshold)
{
    if (!(threshold > 0.0)) throw std::invalid_argument("merge threshold must be positive");

    ReductionReport report;
    report.original_blocks = model.blocks();
    report.threshold = threshold;
    report.entropy_before = entropy_density(model);

    BlockModel current = drop_negligible(model, report.dropped);
    while (current.blocks() > 1) {
        int best_a = -1;
        int best_b = -1;
        double best_gain = INFINITY;
        const double base = entropy_density(current);
        for (int a = 0; a < current.blocks(); ++a) {
            for (int b = a + 1; b < current.blocks(); ++b) {
                double gain;
                try {
                    gain = entropy_density(merge_blocks(current, a, b)) - base;
                } catch (const InvalidModel&) {
                    continue;
                }
                if (gain < best_gain) {
                    best_gain = gain;
                    best_a = a;
                    best_b = b;
                }
            }
        }
        if (best_a < 0 || !(best_gain < threshold)) break;
        current = merge_blocks(current, best_a, best_b);
        report.merges.push_back({best_a, best_b, best_gain});
    }

    report.reduced_blocks = current.blocks();
    report.entropy_after = entropy_density(current);
    return {std::move(current), std::move(report)};
}

}  // namespace sbmrobust
