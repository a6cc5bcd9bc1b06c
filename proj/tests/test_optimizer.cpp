#include "sbmrobust/optimizer.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace sbmrobust;

namespace {

OptConfig small_config(int blocks, long evaluations, std::uint64_t seed = 1)
{
    OptConfig c;
    c.blocks = blocks;
    c.population_size = 12;
    c.max_evaluations = evaluations;
    c.seed = seed;
    c.grid_size = 51;
    c.snapshot_interval = 50;
    return c;
}

bool same_population(const std::vector<Individual>& a, const std::vector<Individual>& b)
{
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].id != b[i].id || !(a[i].genome == b[i].genome)) return false;
        if (a[i].objectives.targeted != b[i].objectives.targeted) return false;
        if (a[i].objectives.random != b[i].objectives.random) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("genome length")
{
    CHECK(genome_length(1) == 2);
    CHECK(genome_length(3) == 9);
    CHECK(genome_length(5) == 20);
}

TEST_CASE("decode examples")
{
    Rng rng(1);
    for (int i = 0; i < 20; ++i) {
        const auto m = decode(Genome{{rng.uniform(), rng.uniform()}}, 1, 2.5);
        REQUIRE(m);
        CHECK(m->size(0) == 1.0);
        CHECK(m->edge(0, 0) == doctest::Approx(2.5).epsilon(1e-15));
    }

    const auto flat = decode(Genome{std::vector<double>(5, 0.3)}, 2, 2.5);
    REQUIRE(flat);
    CHECK(flat->size(0) == 0.5);
    CHECK(flat->size(1) == 0.5);
    for (int r = 0; r < 2; ++r)
        for (int s = 0; s < 2; ++s) CHECK(flat->edge(r, s) == doctest::Approx(0.625).epsilon(1e-15));
    CHECK(flat->mean_degree() == doctest::Approx(2.5).epsilon(1e-15));

    // size genes 5/8 and 1 give weights 1e-3 and 1
    const auto core = decode(Genome{{5.0 / 8.0, 1.0, 0.0, 1.0, 0.9}}, 2, 2.5);
    REQUIRE(core);
    CHECK(core->size(0) == doctest::Approx(1e-3 / (1 + 1e-3)).epsilon(1e-12));

    const auto lonely = decode(Genome{{1.0, 1.0, 1.0, 0.0, 0.0}}, 2, 2.5);
    CHECK_FALSE(lonely);

    CHECK_THROWS_AS(decode(Genome{{0.5, 0.5}}, 2, 2.5), std::invalid_argument);
}

TEST_CASE("decoded models are valid and deterministic")
{
    Rng rng(8);
    int feasible = 0;
    for (int i = 0; i < 500; ++i) {
        const int B = 1 + static_cast<int>(rng.below(5));
        Genome g;
        for (std::size_t k = 0; k < genome_length(B); ++k) g.genes.push_back(rng.uniform());
        const auto a = decode(g, B, 2.5);
        const auto b = decode(g, B, 2.5);
        REQUIRE(a.has_value() == b.has_value());
        if (!a) continue;
        ++feasible;
        CHECK(*a == *b);
        CHECK(is_valid(*a));
        CHECK(std::abs(a->mean_degree() - 2.5) < 1e-12);
    }
    CHECK(feasible > 50);
}

TEST_CASE("config checks and JSON round trip")
{
    OptConfig c;
    c.blocks = 4;
    c.kappa = 3.5;
    c.seed = 123456789012345ULL;
    c.reference = {-0.002, -0.003};
    c.bounds.size_lo = -6.5;
    c.eta_mutation = 17.25;
    const OptConfig back = opt_config_from_json(nlohmann::json::parse(to_json(c).dump()));
    CHECK(back == c);
    CHECK(opt_config_from_json(nlohmann::json::object()) == OptConfig{});

    CHECK_THROWS_WITH_AS(opt_config_from_json({{"blocks", 3}, {"mutation", 0.1}}), "mutation: unknown key",
                         std::invalid_argument);
    CHECK_THROWS_AS(opt_config_from_json({{"kappa", "high"}}), std::invalid_argument);
    CHECK_THROWS_AS(opt_config_from_json({{"reference", {0.0}}}), std::invalid_argument);

    const auto rejects = [](auto edit) {
        OptConfig bad;
        edit(bad);
        CHECK_THROWS_AS(check_config(bad), std::invalid_argument);
    };
    rejects([](OptConfig& b) { b.population_size = 1; });
    rejects([](OptConfig& b) { b.kappa = 1.0; });
    rejects([](OptConfig& b) { b.p_mutation = 1.5; });
    rejects([](OptConfig& b) { b.reference = {0.0, -1.0}; });
    rejects([](OptConfig& b) { b.grid_size = 100; });
    rejects([](OptConfig& b) { b.bounds.edge_lo = 1.0; });
    rejects([](OptConfig& b) { b.max_evaluations = -1; });
    check_config(OptConfig{});
}

TEST_CASE("constant landscape")
{
    const auto result = sms_emoa_run(small_config(3, 200), [](const BlockModel&) { return Objectives{0.5, 0.5}; });
    for (const auto& ind : result.population) {
        if (!ind.model) continue;
        CHECK(ind.objectives.targeted == 0.5);
        CHECK(ind.objectives.random == 0.5);
    }
    CHECK(population_hypervolume(result.population, {-1e-3, -1e-3}) == doctest::Approx(0.501 * 0.501));
}

TEST_CASE("single block runs collapse onto the diagonal")
{
    const double r = robustness_pair(BlockModel::single_block(2.5), 51).random;
    const auto result = sms_emoa_run(small_config(1, 100), robustness_evaluator(51));
    for (const auto& ind : result.population) {
        CHECK(ind.objectives.targeted == doctest::Approx(r).epsilon(1e-12));
        CHECK(ind.objectives.random == doctest::Approx(r).epsilon(1e-12));
    }
}

TEST_CASE("steady-state loop invariants")
{
    SmsEmoa opt(small_config(2, 400, 5), robustness_evaluator(51));
    opt.initialize();
    double hv = population_hypervolume(opt.population(), opt.config().reference);
    while (!opt.finished()) {
        opt.step();
        const double next = population_hypervolume(opt.population(), opt.config().reference);
        CHECK(next >= hv - 1e-15);
        hv = next;
        CHECK(opt.population().size() == 12);
        for (const auto& ind : opt.population()) {
            CHECK(ind.objectives.targeted >= 0.0);
            CHECK(ind.objectives.targeted <= 1.0);
            CHECK(ind.objectives.random >= 0.0);
            CHECK(ind.objectives.random <= 1.0);
            if (!ind.model) CHECK((ind.objectives.targeted == 0.0 && ind.objectives.random == 0.0));
        }
    }
    const auto front = nondominated(opt.population());
    for (const auto& a : front)
        for (const auto& b : front) CHECK_FALSE(dominates(a.objectives, b.objectives));
    for (const auto& a : front) CHECK(a.objectives.random >= a.objectives.targeted - 1e-4);
}

TEST_CASE("runs are reproducible from the seed")
{
    const auto a = sms_emoa_run(small_config(3, 150, 9), robustness_evaluator(51));
    const auto b = sms_emoa_run(small_config(3, 150, 9), robustness_evaluator(51));
    const auto c = sms_emoa_run(small_config(3, 150, 10), robustness_evaluator(51));
    REQUIRE(a.archive.size() == b.archive.size());
    for (std::size_t i = 0; i < a.archive.size(); ++i) {
        CHECK(a.archive[i].evaluations == b.archive[i].evaluations);
        CHECK(same_population(a.archive[i].front, b.archive[i].front));
    }
    CHECK(same_population(a.population, b.population));
    CHECK_FALSE(same_population(a.population, c.population));
}

TEST_CASE("archive snapshots")
{
    OptConfig c = small_config(2, 120);
    const auto run = sms_emoa_run(c, robustness_evaluator(51));
    std::vector<long> at;
    for (const auto& s : run.archive) at.push_back(s.evaluations);
    CHECK(at == std::vector<long>{0, 50, 100, 120});

    c.max_evaluations = 0;
    SmsEmoa fresh(c, robustness_evaluator(51));
    fresh.initialize();
    const auto zero = sms_emoa_run(c, robustness_evaluator(51));
    REQUIRE(zero.archive.size() == 1);
    CHECK(zero.archive[0].evaluations == 0);
    CHECK(same_population(zero.population, fresh.population()));
}

TEST_CASE("evaluator failures are logged and scored as zero")
{
    int calls = 0;
    const Evaluator flaky = [&](const BlockModel& m) -> Objectives {
        if (++calls % 3 == 0) throw std::runtime_error("boom");
        if (calls % 3 == 1 && calls > 20) return {1.5, 0.2};
        return robustness_pair(m, 51);
    };
    const auto run = sms_emoa_run(small_config(2, 100), flaky);
    CHECK(run.failures.size() > 10);
    bool saw_boom = false;
    bool saw_box = false;
    for (const auto& f : run.failures) {
        saw_boom = saw_boom || f.message == "boom";
        saw_box = saw_box || f.message.find("outside") != std::string::npos;
    }
    CHECK(saw_boom);
    CHECK(saw_box);
    for (const auto& ind : run.population) CHECK(ind.objectives.targeted <= 1.0);
}

TEST_CASE("state round-trips through JSON and resumes exactly")
{
    const OptConfig c = small_config(3, 160, 4);
    SmsEmoa straight(c, robustness_evaluator(51));
    straight.initialize();
    while (!straight.finished()) straight.step();

    SmsEmoa first(c, robustness_evaluator(51));
    first.initialize();
    for (int i = 0; i < 70; ++i) first.step();
    const std::string text = to_json(first.state()).dump();

    SmsEmoa second(c, robustness_evaluator(51));
    second.restore(optimizer_state_from_json(nlohmann::json::parse(text), c));
    CHECK(second.state().evaluations == 70);
    while (!second.finished()) second.step();
    CHECK(same_population(second.population(), straight.population()));
    CHECK(second.state().rng_state == straight.state().rng_state);

    CHECK_THROWS_AS(optimizer_state_from_json(nlohmann::json::parse("{\"evaluations\": 3}"), c), std::runtime_error);
    OptConfig other = c;
    other.population_size = 13;
    SmsEmoa mismatched(other, robustness_evaluator(51));
    CHECK_THROWS_AS(mismatched.restore(optimizer_state_from_json(nlohmann::json::parse(text), c)),
                    std::runtime_error);
}

TEST_CASE("constrained fitness")
{
    Individual ind;
    ind.objectives = {0.30, 0.6};
    CHECK(constrained_fitness(ind, {0.3, 0.005, 10.0}) == std::numeric_limits<double>::lowest());
    ind.model = BlockModel::single_block(2.5);
    CHECK(constrained_fitness(ind, {0.3, 0.005, 10.0}) == 0.6);
    CHECK(constrained_fitness(ind, {0.2, 0.005, 10.0}) == doctest::Approx(0.6 - 10 * 0.095));
    CHECK(satisfies(ind, {0.298, 0.005, 10.0}));
    CHECK_FALSE(satisfies(ind, {0.2, 0.005, 10.0}));
}

TEST_CASE("constrained runs")
{
    // the core is a fraction of a percent of the nodes; a coarse grid misses it
    OptConfig c = small_config(2, 3000, 3);
    c.population_size = 50;
    c.grid_size = kDefaultGridSize;

    SUBCASE("target 0 finds a core-periphery model")
    {
        const auto res = constrained_run(c, robustness_evaluator(), 0.0);
        REQUIRE(res.found);
        REQUIRE(res.best.model);
        CHECK(res.best.objectives.targeted <= 0.005);
        CHECK(res.best.objectives.random > 0.69);
        const Eigen::VectorXd k = res.best.model->block_degrees();
        CHECK(k.maxCoeff() > 10 * k.minCoeff());
    }
    SUBCASE("unreachable target")
    {
        const auto res = constrained_run(c, robustness_evaluator(), 0.99);
        CHECK_FALSE(res.found);
        CHECK(res.best.model.has_value());
        CHECK(res.best.objectives.targeted < 0.9);
    }
    SUBCASE("off-front target at high mean degree")
    {
        c.kappa = 3.5;
        const auto low = constrained_run(c, robustness_evaluator(), 0.1);
        REQUIRE(low.found);
        ConstrainedSearch free(c, {0.5, 0.5, 10.0}, robustness_evaluator());
        free.initialize();
        while (!free.finished()) free.step();
        REQUIRE(free.state().best_feasible);
        CHECK(low.best.objectives.random < free.state().best_feasible->objectives.random);
    }
    CHECK_THROWS_AS(ConstrainedSearch(c, {1.5, 0.005, 10.0}, robustness_evaluator(51)), std::invalid_argument);
}
