#pragma once

#include "sbmrobust/blockmodel.hpp"
#include "sbmrobust/hypervolume.hpp"
#include "sbmrobust/variation.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace sbmrobust {

/// Exponent ranges (base 10) of the log-scale genome decoding.
struct DecodeBounds {
    double size_lo = -8.0;
    double size_hi = 0.0;
    double edge_lo = -8.0;
    double edge_hi = 0.0;
};

struct OptConfig {
    int blocks = 3;
    double kappa = 2.5;
    int population_size = 50;
    /// Offspring evaluations after the initial population.
    long max_evaluations = 50'000;
    std::uint64_t seed = 1;
    double eta_crossover = 20.0;
    double eta_mutation = 15.0;
    double p_crossover = 1.0;
    double p_mutation = 1.0;
    Objectives reference{-1e-3, -1e-3};
    int grid_size = kDefaultGridSize;
    DecodeBounds bounds;
    long snapshot_interval = 1000;

    bool operator==(const OptConfig&) const;
};

/// Throws std::invalid_argument naming the first bad field.
void check_config(const OptConfig& config);

nlohmann::json to_json(const OptConfig& config);
/// Missing keys keep their defaults; unknown keys are rejected.
OptConfig opt_config_from_json(const nlohmann::json& doc);

/// B size genes followed by the upper triangle of the edge matrix
/// (row-major, diagonal included).
std::size_t genome_length(int blocks);

/*
 * Genome -> block model. Sizes and edge entries are decoded on a log scale,
 * w = 10^(lo + g (hi - lo)); sizes are normalized to sum to one and the
 * edge matrix so that sum_rs e_rs = kappa (off-diagonal entries counted
 * twice). Returns nullopt when some block degree is at or below the
 * feasibility floor.
 */
std::optional<BlockModel> decode(const Genome& genome, int blocks, double kappa,
                                 const DecodeBounds& bounds = {});

struct Individual {
    std::uint64_t id = 0;
    Genome genome;
    std::optional<BlockModel> model;  // nullopt: infeasible decode
    Objectives objectives{0.0, 0.0};
};

using Evaluator = std::function<Objectives(const BlockModel&)>;

/// robustness_pair on the given grid.
Evaluator robustness_evaluator(int grid_size = kDefaultGridSize);

struct EvaluationFailure {
    std::uint64_t id = 0;
    std::string message;
};

/// Everything needed to continue a run bit-for-bit.
struct OptimizerState {
    long evaluations = 0;
    std::uint64_t next_id = 0;
    std::string rng_state;
    std::vector<Individual> population;
    std::vector<EvaluationFailure> failures;
    /// Constrained runs only: best individual satisfying the constraint, and
    /// the best by penalized fitness regardless of feasibility.
    std::optional<Individual> best_feasible;
    std::optional<Individual> best_attempt;
};

/// Population members that no other member dominates.
std::vector<Individual> nondominated(const std::vector<Individual>& population);

double population_hypervolume(const std::vector<Individual>& population, const Objectives& reference);

/*
 * Steady-state S-metric selection EMOA. Each step creates one offspring by
 * SBX and polynomial mutation from two uniformly drawn parents, adds it to
 * the population and removes the member of the worst non-dominated rank
 * with the smallest hypervolume contribution.
 */
class SmsEmoa {
public:
    SmsEmoa(OptConfig config, Evaluator evaluator);

    void initialize();
    void restore(const OptimizerState& state);

    void step();
    bool finished() const { return state_.evaluations >= config_.max_evaluations; }

    const OptConfig& config() const { return config_; }
    /// Current state including the generator position.
    OptimizerState state() const;
    const std::vector<Individual>& population() const { return state_.population; }

private:
    Individual make_individual(Genome genome);
    Genome offspring_genome();

    OptConfig config_;
    Evaluator evaluator_;
    Rng rng_;
    OptimizerState state_;
};

struct Snapshot {
    long evaluations = 0;
    std::vector<Individual> front;
};

struct RunResult {
    std::vector<Snapshot> archive;
    std::vector<Individual> population;
    std::vector<EvaluationFailure> failures;
};

/// Full run; snapshots at evaluation 0, every snapshot_interval, and at the end.
RunResult sms_emoa_run(const OptConfig& config, const Evaluator& evaluator);

struct ConstraintSpec {
    double target = 0.0;
    double tolerance = 0.005;
    double penalty = 10.0;
};

/// R_random - penalty * max(0, |R_targeted - target| - tolerance); lowest()
/// for infeasible decodes.
double constrained_fitness(const Individual& individual, const ConstraintSpec& spec);
bool satisfies(const Individual& individual, const ConstraintSpec& spec);

/*
 * Single-objective steady-state search maximizing R_random at a fixed
 * R_targeted. Same variation operators as SmsEmoa; the offspring replaces
 * the worst member when it is strictly fitter.
 */
class ConstrainedSearch {
public:
    ConstrainedSearch(OptConfig config, ConstraintSpec spec, Evaluator evaluator);

    void initialize();
    void restore(const OptimizerState& state);
    void step();
    bool finished() const { return state_.evaluations >= config_.max_evaluations; }

    const OptConfig& config() const { return config_; }
    const ConstraintSpec& spec() const { return spec_; }
    OptimizerState state() const;

private:
    Individual make_individual(Genome genome);
    void track(const Individual& individual);

    OptConfig config_;
    ConstraintSpec spec_;
    Evaluator evaluator_;
    Rng rng_;
    OptimizerState state_;
};

struct ConstrainedResult {
    bool found = false;
    /// Best feasible individual when found, otherwise the best attempt.
    Individual best;
    std::vector<EvaluationFailure> failures;
};

ConstrainedResult constrained_run(const OptConfig& config, const Evaluator& evaluator,
                                  double r_targeted_target, double tolerance = 0.005);

nlohmann::json to_json(const OptimizerState& state);
/// Re-decodes models from genomes with the given configuration. Throws
/// std::runtime_error on malformed documents.
OptimizerState optimizer_state_from_json(const nlohmann::json& doc, const OptConfig& config);

}  // namespace sbmrobust
