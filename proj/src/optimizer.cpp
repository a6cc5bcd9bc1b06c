#include "sbmrobust/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sbmrobust {

bool OptConfig::operator==(const OptConfig& o) const
{
    return blocks == o.blocks && kappa == o.kappa && population_size == o.population_size &&
           max_evaluations == o.max_evaluations && seed == o.seed &&
           eta_crossover == o.eta_crossover && eta_mutation == o.eta_mutation &&
           p_crossover == o.p_crossover && p_mutation == o.p_mutation &&
           reference.targeted == o.reference.targeted && reference.random == o.reference.random &&
           grid_size == o.grid_size && bounds.size_lo == o.bounds.size_lo &&
           bounds.size_hi == o.bounds.size_hi && bounds.edge_lo == o.bounds.edge_lo &&
           bounds.edge_hi == o.bounds.edge_hi && snapshot_interval == o.snapshot_interval;
}

void check_config(const OptConfig& c)
{
    const auto fail = [](const std::string& field, const std::string& why) {
        throw std::invalid_argument(field + ": " + why);
    };
    if (c.blocks < 1) fail("blocks", "must be at least 1");
    if (!(c.kappa > 1.0)) fail("kappa", "network mean degree must exceed 1");
    if (c.population_size < 2) fail("population_size", "must be at least 2");
    if (c.max_evaluations < 0) fail("max_evaluations", "must be non-negative");
    if (!(c.eta_crossover > 0.0)) fail("eta_crossover", "must be positive");
    if (!(c.eta_mutation > 0.0)) fail("eta_mutation", "must be positive");
    if (!(c.p_crossover >= 0.0 && c.p_crossover <= 1.0)) fail("p_crossover", "must lie in [0, 1]");
    if (!(c.p_mutation >= 0.0 && c.p_mutation <= 1.0)) fail("p_mutation", "must lie in [0, 1]");
    if (!(c.reference.targeted < 0.0 && c.reference.random < 0.0))
        fail("reference", "must lie strictly below the objective box [0, 1]^2");
    if (c.grid_size < 3 || c.grid_size % 2 == 0) fail("grid_size", "must be odd and at least 3");
    if (!(c.bounds.size_lo < c.bounds.size_hi)) fail("log_size_bounds", "must be ordered");
    if (!(c.bounds.edge_lo < c.bounds.edge_hi)) fail("log_edge_bounds", "must be ordered");
    if (c.snapshot_interval < 1) fail("snapshot_interval", "must be at least 1");
}

nlohmann::json to_json(const OptConfig& c)
{
    return {{"blocks", c.blocks},
            {"kappa", c.kappa},
            {"population_size", c.population_size},
            {"max_evaluations", c.max_evaluations},
            {"seed", c.seed},
            {"eta_crossover", c.eta_crossover},
            {"eta_mutation", c.eta_mutation},
            {"p_crossover", c.p_crossover},
            {"p_mutation", c.p_mutation},
            {"reference", {c.reference.targeted, c.reference.random}},
            {"grid_size", c.grid_size},
            {"log_size_bounds", {c.bounds.size_lo, c.bounds.size_hi}},
            {"log_edge_bounds", {c.bounds.edge_lo, c.bounds.edge_hi}},
            {"snapshot_interval", c.snapshot_interval}};
}

namespace {

template <typename T>
T get_field(const nlohmann::json& doc, const std::string& key)
{
    try {
        return doc.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw std::invalid_argument(key + ": wrong type");
    }
}

std::pair<double, double> get_pair(const nlohmann::json& doc, const std::string& key)
{
    const auto& v = doc.at(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        throw std::invalid_argument(key + ": expected two numbers");
    return {v[0].get<double>(), v[1].get<double>()};
}

}  // namespace

OptConfig opt_config_from_json(const nlohmann::json& doc)
{
    if (!doc.is_object()) throw std::invalid_argument("optimizer config: expected an object");
    OptConfig c;
    for (const auto& item : doc.items()) {
        const std::string& key = item.key();
        if (key == "blocks") c.blocks = get_field<int>(doc, key);
        else if (key == "kappa") c.kappa = get_field<double>(doc, key);
        else if (key == "population_size") c.population_size = get_field<int>(doc, key);
        else if (key == "max_evaluations") c.max_evaluations = get_field<long>(doc, key);
        else if (key == "seed") c.seed = get_field<std::uint64_t>(doc, key);
        else if (key == "eta_crossover") c.eta_crossover = get_field<double>(doc, key);
        else if (key == "eta_mutation") c.eta_mutation = get_field<double>(doc, key);
        else if (key == "p_crossover") c.p_crossover = get_field<double>(doc, key);
        else if (key == "p_mutation") c.p_mutation = get_field<double>(doc, key);
        else if (key == "reference") std::tie(c.reference.targeted, c.reference.random) = get_pair(doc, key);
        else if (key == "grid_size") c.grid_size = get_field<int>(doc, key);
        else if (key == "log_size_bounds") std::tie(c.bounds.size_lo, c.bounds.size_hi) = get_pair(doc, key);
        else if (key == "log_edge_bounds") std::tie(c.bounds.edge_lo, c.bounds.edge_hi) = get_pair(doc, key);
        else if (key == "snapshot_interval") c.snapshot_interval = get_field<long>(doc, key);
        else throw std::invalid_argument(key + ": unknown key");
    }
    return c;
}

std::size_t genome_length(int blocks)
{
    const auto b = static_cast<std::size_t>(blocks);
    return b + b * (b + 1) / 2;
}

std::optional<BlockModel> decode(const Genome& genome, int blocks, double kappa,
                                 const DecodeBounds& bounds)
{
    if (genome.size() != genome_length(blocks))
        throw std::invalid_argument("decode: genome length does not match B");
    const auto level = [](double g, double lo, double hi) { return std::pow(10.0, lo + g * (hi - lo)); };

    Eigen::VectorXd n(blocks);
    for (int r = 0; r < blocks; ++r) n(r) = level(genome.genes[r], bounds.size_lo, bounds.size_hi);
    n /= n.sum();

    Eigen::MatrixXd e(blocks, blocks);
    std::size_t k = blocks;
    for (int r = 0; r < blocks; ++r)
        for (int s = r; s < blocks; ++s)
            e(r, s) = e(s, r) = level(genome.genes[k++], bounds.edge_lo, bounds.edge_hi);
    e *= kappa / e.sum();

    BlockModel model(std::move(n), std::move(e));
    for (int r = 0; r < blocks; ++r)
        if (!(model.block_degree(r) > kMinBlockDegree)) return std::nullopt;
    return model;
}

Evaluator robustness_evaluator(int grid_size)
{
    return [grid_size](const BlockModel& model) { return robustness_pair(model, grid_size); };
}

std::vector<Individual> nondominated(const std::vector<Individual>& population)
{
    std::vector<Objectives> points;
    points.reserve(population.size());
    for (const auto& ind : population) points.push_back(ind.objectives);
    std::vector<Individual> out;
    if (points.empty()) return out;
    const auto fronts = nondominated_fronts(points);
    for (std::size_t i : fronts.front()) out.push_back(population[i]);
    return out;
}

double population_hypervolume(const std::vector<Individual>& population, const Objectives& reference)
{
    std::vector<Objectives> points;
    points.reserve(population.size());
    for (const auto& ind : population) points.push_back(ind.objectives);
    return hypervolume_2d(points, reference).value;
}

namespace {

Genome random_genome(std::size_t length, Rng& rng)
{
    Genome g;
    g.genes.resize(length);
    for (double& x : g.genes) x = rng.uniform();
    return g;
}

Genome make_offspring(const std::vector<Individual>& population, const OptConfig& config, Rng& rng)
{
    const std::size_t n = population.size();
    const std::size_t i = rng.below(n);
    std::size_t j = rng.below(n - 1);
    if (j >= i) ++j;

    Genome child = population[i].genome;
    if (rng.uniform() < config.p_crossover)
        child = sbx_crossover(population[i].genome, population[j].genome, config.eta_crossover, rng).first;
    if (rng.uniform() < config.p_mutation)
        child = polynomial_mutation(child, config.eta_mutation, 1.0 / static_cast<double>(child.size()), rng);
    return child;
}

Individual evaluate(std::uint64_t id, Genome genome, const OptConfig& config, const Evaluator& evaluator,
                    std::vector<EvaluationFailure>& failures)
{
    Individual ind;
    ind.id = id;
    ind.model = decode(genome, config.blocks, config.kappa, config.bounds);
    ind.genome = std::move(genome);
    if (!ind.model) return ind;
    try {
        const Objectives obj = evaluator(*ind.model);
        const auto in_box = [](double v) { return v >= -1e-12 && v <= 1.0 + 1e-12; };
        if (!in_box(obj.targeted) || !in_box(obj.random))
            throw std::runtime_error("objectives outside [0, 1]");
        ind.objectives = {std::clamp(obj.targeted, 0.0, 1.0), std::clamp(obj.random, 0.0, 1.0)};
    } catch (const std::exception& err) {
        failures.push_back({id, err.what()});
        ind.objectives = {0.0, 0.0};
    }
    return ind;
}

}  // namespace

SmsEmoa::SmsEmoa(OptConfig config, Evaluator evaluator)
    : config_(std::move(config)), evaluator_(std::move(evaluator)), rng_(config_.seed)
{
    check_config(config_);
}

void SmsEmoa::initialize()
{
    rng_ = Rng(config_.seed);
    state_ = OptimizerState{};
    const std::size_t d = genome_length(config_.blocks);
    for (int i = 0; i < config_.population_size; ++i)
        state_.population.push_back(make_individual(random_genome(d, rng_)));
}

void SmsEmoa::restore(const OptimizerState& state)
{
    if (static_cast<int>(state.population.size()) != config_.population_size)
        throw std::runtime_error("checkpoint population size does not match the configuration");
    state_ = state;
    rng_.restore(state.rng_state);
}

OptimizerState SmsEmoa::state() const
{
    OptimizerState s = state_;
    s.rng_state = rng_.state();
    return s;
}

Individual SmsEmoa::make_individual(Genome genome)
{
    return evaluate(state_.next_id++, std::move(genome), config_, evaluator_, state_.failures);
}

Genome SmsEmoa::offspring_genome()
{
    return make_offspring(state_.population, config_, rng_);
}

void SmsEmoa::step()
{
    auto& pop = state_.population;
    pop.push_back(make_individual(offspring_genome()));
    ++state_.evaluations;

    std::vector<Objectives> points;
    points.reserve(pop.size());
    for (const auto& ind : pop) points.push_back(ind.objectives);
    const auto fronts = nondominated_fronts(points);
    const auto& worst = fronts.back();

    std::size_t victim = worst.front();
    if (worst.size() > 1) {
        std::vector<Objectives> worst_points;
        worst_points.reserve(worst.size());
        for (std::size_t i : worst) worst_points.push_back(points[i]);
        const auto contrib = hv_contributions(worst_points, config_.reference);
        const auto it = std::min_element(contrib.begin(), contrib.end());
        victim = worst[static_cast<std::size_t>(it - contrib.begin())];
    }
    pop.erase(pop.begin() + static_cast<std::ptrdiff_t>(victim));
}

RunResult sms_emoa_run(const OptConfig& config, const Evaluator& evaluator)
{
    SmsEmoa opt(config, evaluator);
    opt.initialize();
    RunResult result;
    result.archive.push_back({0, nondominated(opt.population())});
    while (!opt.finished()) {
        opt.step();
        const long evals = opt.state().evaluations;
        if (evals % config.snapshot_interval == 0 || opt.finished())
            result.archive.push_back({evals, nondominated(opt.population())});
    }
    const OptimizerState final_state = opt.state();
    result.population = final_state.population;
    result.failures = final_state.failures;
    return result;
}

double constrained_fitness(const Individual& ind, const ConstraintSpec& spec)
{
    if (!ind.model) return std::numeric_limits<double>::lowest();
    const double miss = std::abs(ind.objectives.targeted - spec.target) - spec.tolerance;
    return ind.objectives.random - spec.penalty * std::max(0.0, miss);
}

bool satisfies(const Individual& ind, const ConstraintSpec& spec)
{
    return ind.model.has_value() &&
           std::abs(ind.objectives.targeted - spec.target) <= spec.tolerance;
}

ConstrainedSearch::ConstrainedSearch(OptConfig config, ConstraintSpec spec, Evaluator evaluator)
    : config_(std::move(config)), spec_(spec), evaluator_(std::move(evaluator)), rng_(config_.seed)
{
    check_config(config_);
    if (!(spec_.target >= 0.0 && spec_.target <= 1.0))
        throw std::invalid_argument("target: R_targeted target must lie in [0, 1]");
    if (!(spec_.tolerance >= 0.0)) throw std::invalid_argument("tolerance: must be non-negative");
}

void ConstrainedSearch::initialize()
{
    rng_ = Rng(config_.seed);
    state_ = OptimizerState{};
    const std::size_t d = genome_length(config_.blocks);
    for (int i = 0; i < config_.population_size; ++i) {
        state_.population.push_back(make_individual(random_genome(d, rng_)));
        track(state_.population.back());
    }
}

void ConstrainedSearch::restore(const OptimizerState& state)
{
    if (static_cast<int>(state.population.size()) != config_.population_size)
        throw std::runtime_error("checkpoint population size does not match the configuration");
    state_ = state;
    rng_.restore(state.rng_state);
}

OptimizerState ConstrainedSearch::state() const
{
    OptimizerState s = state_;
    s.rng_state = rng_.state();
    return s;
}

Individual ConstrainedSearch::make_individual(Genome genome)
{
    return evaluate(state_.next_id++, std::move(genome), config_, evaluator_, state_.failures);
}

void ConstrainedSearch::track(const Individual& ind)
{
    if (!state_.best_attempt ||
        constrained_fitness(ind, spec_) > constrained_fitness(*state_.best_attempt, spec_))
        state_.best_attempt = ind;
    if (satisfies(ind, spec_) &&
        (!state_.best_feasible || ind.objectives.random > state_.best_feasible->objectives.random))
        state_.best_feasible = ind;
}

void ConstrainedSearch::step()
{
    auto& pop = state_.population;
    Individual child = make_individual(make_offspring(pop, config_, rng_));
    ++state_.evaluations;
    track(child);

    std::size_t worst = 0;
    for (std::size_t i = 1; i < pop.size(); ++i)
        if (constrained_fitness(pop[i], spec_) < constrained_fitness(pop[worst], spec_)) worst = i;
    if (constrained_fitness(child, spec_) > constrained_fitness(pop[worst], spec_))
        pop[worst] = std::move(child);
}

ConstrainedResult constrained_run(const OptConfig& config, const Evaluator& evaluator,
                                  double r_targeted_target, double tolerance)
{
    ConstrainedSearch search(config, {r_targeted_target, tolerance, 10.0}, evaluator);
    search.initialize();
    while (!search.finished()) search.step();
    const OptimizerState s = search.state();
    ConstrainedResult result;
    result.found = s.best_feasible.has_value();
    result.best = result.found ? *s.best_feasible : *s.best_attempt;
    result.failures = s.failures;
    return result;
}

namespace {

nlohmann::json individual_json(const Individual& ind)
{
    return {{"id", ind.id},
            {"genes", ind.genome.genes},
            {"objectives", {ind.objectives.targeted, ind.objectives.random}}};
}

Individual individual_from_json(const nlohmann::json& doc, const OptConfig& config)
{
    Individual ind;
    ind.id = doc.at("id").get<std::uint64_t>();
    ind.genome.genes = doc.at("genes").get<std::vector<double>>();
    const auto& obj = doc.at("objectives");
    if (!obj.is_array() || obj.size() != 2) throw std::runtime_error("objectives: expected two numbers");
    ind.objectives = {obj[0].get<double>(), obj[1].get<double>()};
    if (ind.genome.size() != genome_length(config.blocks))
        throw std::runtime_error("genes: length does not match B");
    ind.model = decode(ind.genome, config.blocks, config.kappa, config.bounds);
    return ind;
}

}  // namespace

nlohmann::json to_json(const OptimizerState& state)
{
    nlohmann::json pop = nlohmann::json::array();
    for (const auto& ind : state.population) pop.push_back(individual_json(ind));
    nlohmann::json failures = nlohmann::json::array();
    for (const auto& f : state.failures) failures.push_back({{"id", f.id}, {"message", f.message}});
    nlohmann::json doc = {{"evaluations", state.evaluations},
                          {"next_id", state.next_id},
                          {"rng_state", state.rng_state},
                          {"population", std::move(pop)},
                          {"failures", std::move(failures)}};
    doc["best_feasible"] = state.best_feasible ? individual_json(*state.best_feasible) : nlohmann::json();
    doc["best_attempt"] = state.best_attempt ? individual_json(*state.best_attempt) : nlohmann::json();
    return doc;
}

OptimizerState optimizer_state_from_json(const nlohmann::json& doc, const OptConfig& config)
{
    try {
        OptimizerState s;
        s.evaluations = doc.at("evaluations").get<long>();
        s.next_id = doc.at("next_id").get<std::uint64_t>();
        s.rng_state = doc.at("rng_state").get<std::string>();
        for (const auto& item : doc.at("population")) s.population.push_back(individual_from_json(item, config));
        for (const auto& item : doc.at("failures"))
            s.failures.push_back({item.at("id").get<std::uint64_t>(), item.at("message").get<std::string>()});
        if (!doc.at("best_feasible").is_null())
            s.best_feasible = individual_from_json(doc.at("best_feasible"), config);
        if (!doc.at("best_attempt").is_null())
            s.best_attempt = individual_from_json(doc.at("best_attempt"), config);
        return s;
    } catch (const nlohmann::json::exception& err) {
        throw std::runtime_error(std::string("malformed optimizer state: ") + err.what());
    }
}

}  // namespace sbmrobust
