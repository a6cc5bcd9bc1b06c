#pragma once

#include "sbmrobust/blockmodel.hpp"

#include <json.hpp>

#include <utility>
#include <vector>

namespace sbmrobust {

inline constexpr double kDefaultMergeThreshold = 0.025;

/// Blocks below both thresholds (size and edge mass) are dropped by reduce().
inline constexpr double kNegligibleBlock = 1e-8;

/// Partition-dependent entropy per node, in nats:
///     s = -1/2 sum_rs e_rs ln(e_rs / (n_r kappa_r n_s kappa_s)),
/// with 0 ln 0 = 0.
double entropy_density(const BlockModel& model);

/// Entropy gained by merging blocks a and b. Non-negative up to rounding.
double merge_gain(const BlockModel& model, int a, int b);

struct MergeRecord {
    int a = 0;  // indices in the model as it was before this merge
    int b = 0;
    double gain = 0.0;
};

struct DropRecord {
    int block = 0;  // index in the original model
    double size = 0.0;
};

struct ReductionReport {
    int original_blocks = 0;
    int reduced_blocks = 0;
    double threshold = kDefaultMergeThreshold;
    std::vector<MergeRecord> merges;
    std::vector<DropRecord> dropped;
    double entropy_before = 0.0;
    double entropy_after = 0.0;
};

nlohmann::json to_json(const ReductionReport& report);

/// First stage of reduce(): removes blocks with n_r and n_r kappa_r both below
/// kNegligibleBlock, renormalizing n and rescaling e to keep the mean degree.
BlockModel drop_negligible(const BlockModel& model, std::vector<DropRecord>& dropped);

/*
 * Drop negligible blocks (n_r and n_r kappa_r both below 1e-8), renormalizing
 * n and rescaling e so the network mean degree is unchanged, then merge the
 * pair with the smallest entropy gain for as long as that gain stays below
 * `threshold`. Ties go to the lowest (a, b) pair.
 */
std::pair<BlockModel, ReductionReport> reduce(const BlockModel& model,
                                              double threshold = kDefaultMergeThreshold);

}  // namespace sbmrobust
