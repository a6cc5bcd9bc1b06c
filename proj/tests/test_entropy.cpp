#include "sbmrobust/entropy.hpp"
#include "sbmrobust/percolation.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace sbmrobust;
using testing::model2;

namespace {

// Direct transcription with n_r kappa_r in the denominator.
double entropy_oracle(const BlockModel& m)
{
    const Eigen::VectorXd kappa = m.block_degrees();
    double s = 0.0;
    for (int r = 0; r < m.blocks(); ++r)
        for (int t = 0; t < m.blocks(); ++t) {
            const double e = m.edge(r, t);
            if (e == 0.0) continue;
            s += -0.5 * e * std::log(e / (m.size(r) * kappa(r) * m.size(t) * kappa(t)));
        }
    return s;
}

// Split block r into two pieces carrying fractions f and 1 - f of its nodes
// and edges, then nudge the new pair's mutual edges by `jitter`.
BlockModel split_block(const BlockModel& m, int r, double f, double jitter)
{
    const int B = m.blocks();
    Eigen::VectorXd n(B + 1);
    Eigen::MatrixXd e = Eigen::MatrixXd::Zero(B + 1, B + 1);
    std::vector<double> share(B + 1, 1.0);
    std::vector<int> origin(B + 1);
    for (int i = 0; i < B; ++i) origin[i] = i;
    origin[B] = r;
    share[r] = f;
    share[B] = 1.0 - f;
    for (int i = 0; i <= B; ++i) {
        n(i) = m.size(origin[i]) * share[i];
        for (int j = 0; j <= B; ++j) e(i, j) = m.edge(origin[i], origin[j]) * (share[i] * share[j]);
    }
    const double move = jitter * e(r, B);
    e(r, B) += move;
    e(B, r) += move;
    e(r, r) -= move;
    e(B, B) -= move;
    return BlockModel(n, e);
}

}  // namespace

TEST_CASE("entropy density examples")
{
    const BlockModel split = model2(0.5, 0.5, 0.625, 0.625, 0.625);
    CHECK(entropy_density(split) == doctest::Approx(entropy_density(BlockModel::single_block(2.5))).epsilon(1e-14));

    const double bip = entropy_density(model2(0.5, 0.5, 0.0, 1.25, 0.0));
    const double one = entropy_density(BlockModel::single_block(2.5));
    CHECK(bip == doctest::Approx(0.278929).epsilon(1e-6));
    CHECK(one == doctest::Approx(1.145363).epsilon(1e-6));
    CHECK(std::abs(one - bip - 1.25 * std::log(2.0)) < 1e-12);

    for (double k : {1.5, 2.5, 7.0})
        CHECK(entropy_density(BlockModel::single_block(k)) == doctest::Approx(0.5 * k * std::log(k)).epsilon(1e-14));
}

TEST_CASE("entropy density matches a direct transcription")
{
    Rng rng(6);
    for (int i = 0; i < 200; ++i) {
        const BlockModel m = testing::random_model(1 + static_cast<int>(rng.below(6)), rng);
        CHECK(entropy_density(m) == doctest::Approx(entropy_oracle(m)).epsilon(1e-12));
    }
}

TEST_CASE("entropy density is invariant under relabeling")
{
    Rng rng(7);
    for (int i = 0; i < 100; ++i) {
        const int B = 2 + static_cast<int>(rng.below(4));
        const BlockModel m = testing::random_model(B, rng);
        std::vector<int> perm(B);
        for (int r = 0; r < B; ++r) perm[r] = r;
        for (int r = B - 1; r > 0; --r) std::swap(perm[r], perm[rng.below(r + 1)]);
        Eigen::VectorXd n(B);
        Eigen::MatrixXd e(B, B);
        for (int r = 0; r < B; ++r) {
            n(r) = m.size(perm[r]);
            for (int s = 0; s < B; ++s) e(r, s) = m.edge(perm[r], perm[s]);
        }
        CHECK(entropy_density(BlockModel(n, e)) == doctest::Approx(entropy_density(m)).epsilon(1e-12));
    }
}

TEST_CASE("merge gain examples")
{
    CHECK(std::abs(merge_gain(model2(0.5, 0.5, 0.625, 0.625, 0.625), 0, 1)) < 1e-10);
    CHECK(merge_gain(model2(0.5, 0.5, 0.0, 1.25, 0.0), 0, 1) == doctest::Approx(1.25 * std::log(2.0)).epsilon(1e-12));
    CHECK(merge_gain(model2(1e-3, 0.999, 0.0, 1.2, 0.1), 0, 1) > 0.1);
    CHECK_THROWS_AS(merge_gain(model2(0.5, 0.5, 0.1, 0.1, 0.2), 0, 1), InvalidModel);
}

TEST_CASE("merging never lowers the entropy")
{
    Rng rng(12);
    for (int i = 0; i < 200; ++i) {
        const int B = 2 + static_cast<int>(rng.below(5));
        const BlockModel m = testing::random_model(B, rng, 1.05, 1e3);
        for (int a = 0; a < B; ++a)
            for (int b = a + 1; b < B; ++b) CHECK(merge_gain(m, a, b) >= -1e-12);
    }
}

TEST_CASE("reduce examples")
{
    Eigen::MatrixXd e(3, 3);
    e << 0.3, 0.1, 0.3, 0.1, 1.2, 0.3, 0.3, 0.3, 0.3;
    const BlockModel base(Eigen::Vector3d(0.2, 0.5, 0.3), e);
    const BlockModel split = split_block(merge_blocks(base, 0, 2), 0, 0.4, 0.0);
    const auto [merged, report] = reduce(split);
    CHECK(merged.blocks() == 2);
    REQUIRE(report.merges.size() == 1);
    CHECK(report.merges[0].gain < 1e-10);

    const auto [bip, bip_report] = reduce(model2(0.5, 0.5, 0.0, 1.25, 0.0), 0.025);
    CHECK(bip == model2(0.5, 0.5, 0.0, 1.25, 0.0));
    CHECK(bip_report.merges.empty());
    CHECK(bip_report.reduced_blocks == 2);

    CHECK_THROWS_AS(reduce(bip, 0.0), std::invalid_argument);
}

TEST_CASE("reduce drops negligible blocks and keeps the network degree")
{
    Eigen::MatrixXd e(3, 3);
    e << 1.0, 0.2, 1e-10, 0.2, 1.0, 0.0, 1e-10, 0.0, 2e-9;
    const double tiny = 1e-9;
    const BlockModel m(Eigen::Vector3d(0.4, 0.6 - tiny, tiny), e);
    const auto [out, report] = reduce(m, 1e-6);
    REQUIRE(report.dropped.size() == 1);
    CHECK(report.dropped[0].block == 2);
    CHECK(report.dropped[0].size == tiny);
    CHECK(out.blocks() == 2);
    CHECK(out.sizes().sum() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(out.mean_degree() == doctest::Approx(m.mean_degree()).epsilon(1e-14));

    // a tiny block with a large edge mass is a core, not noise
    Eigen::MatrixXd core(2, 2);
    core << 0.0, 1.2, 1.2, 0.1;
    const auto kept = reduce(BlockModel(Eigen::Vector2d(tiny, 1.0 - tiny), core)).first;
    CHECK(kept.blocks() == 2);
}

TEST_CASE("reduce is idempotent and deterministic")
{
    Rng rng(31);
    for (int i = 0; i < 60; ++i) {
        BlockModel m = testing::random_model(2 + static_cast<int>(rng.below(3)), rng);
        m = split_block(m, static_cast<int>(rng.below(m.blocks())), 0.1 + 0.8 * rng.uniform(), 0.01 * rng.uniform());
        const auto once = reduce(m).first;
        CHECK(reduce(once).first == once);
        CHECK(reduce(m).first == once);
    }
}

TEST_CASE("undoing an exact split leaves robustness unchanged")
{
    Rng rng(41);
    for (int i = 0; i < 40; ++i) {
        const BlockModel m = testing::random_model(1 + static_cast<int>(rng.below(3)), rng, 1.3, 8.0);
        // blocks that already share a mixing profile merge at zero cost too
        if (!reduce(m, 1e-9).second.merges.empty()) continue;
        const BlockModel split = split_block(m, static_cast<int>(rng.below(m.blocks())), 0.1 + 0.8 * rng.uniform(), 0.0);
        const auto [merged, report] = reduce(split, 1e-9);
        REQUIRE(report.merges.size() == 1);
        CHECK(merged.blocks() == m.blocks());
        const RobustnessPair before = robustness_pair(split);
        const RobustnessPair after = robustness_pair(merged);
        CHECK(std::abs(before.targeted - after.targeted) < 1e-6);
        CHECK(std::abs(before.random - after.random) < 1e-6);
    }
}

TEST_CASE("entropy ignores degree differences between blocks with one mixing profile")
{
    // two leaves hanging off the same hub, with different degrees
    Eigen::MatrixXd e(3, 3);
    e << 0.5, 0.4, 0.6, 0.4, 0.0, 0.0, 0.6, 0.0, 0.0;
    const BlockModel m(Eigen::Vector3d(0.3, 0.2, 0.5), e);
    CHECK(m.block_degree(1) != doctest::Approx(m.block_degree(2)));
    CHECK(std::abs(merge_gain(m, 1, 2)) < 1e-12);
}

TEST_CASE("reduction report export")
{
    const auto report = reduce(model2(0.5, 0.5, 0.625, 0.625, 0.625)).second;
    const auto doc = to_json(report);
    CHECK(doc.at("original_B") == 2);
    CHECK(doc.at("reduced_B") == 1);
    CHECK(doc.at("epsilon") == kDefaultMergeThreshold);
    CHECK(doc.at("merges").size() == 1);
    CHECK(doc.at("merges")[0].at("blocks") == nlohmann::json::array({0, 1}));
    CHECK(doc.at("dropped").empty());
    CHECK(doc.at("entropy_before").get<double>() == doctest::Approx(doc.at("entropy_after").get<double>()));
}
