#include "sbmrobust/cli.hpp"

#include "sbmrobust/model_io.hpp"
#include "sbmrobust/oracle.hpp"
#include "sbmrobust/percolation.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;

namespace sbmrobust {

namespace {

class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string num(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// Written next to the target and renamed, so readers never see half a file.
void write_text(const fs::path& path, const std::string& text)
{
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << text;
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
    }
    fs::rename(tmp, path);
}

nlohmann::json read_json(const fs::path& path, const std::string& what)
{
    std::ifstream in(path);
    if (!in) throw DataError(what + ": cannot open " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& err) {
        throw DataError(what + ": " + path.string() + " is not valid JSON (" + err.what() + ")");
    }
}

BlockModel load_model(const fs::path& path, std::ostream& err)
{
    BlockModel model = read_model(path);
    const auto issues = validate(model);
    if (!issues.empty()) err << describe(issues);
    if (!is_valid(model)) throw InvalidModel("model " + path.string() + " failed validation");
    return model;
}

// ---------------------------------------------------------------- config

template <typename T>
T get(const nlohmann::json& doc, const std::string& key)
{
    try {
        return doc.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw std::invalid_argument(key + ": wrong type");
    }
}

ConstraintSpec constraint_from_json(const nlohmann::json& doc)
{
    if (!doc.is_object()) throw std::invalid_argument("constraint: expected an object");
    ConstraintSpec c;
    for (const auto& item : doc.items()) {
        const std::string& key = item.key();
        if (key == "target") c.target = get<double>(doc, key);
        else if (key == "tolerance") c.tolerance = get<double>(doc, key);
        else if (key == "penalty") c.penalty = get<double>(doc, key);
        else throw std::invalid_argument("constraint." + key + ": unknown key");
    }
    return c;
}

// ---------------------------------------------------------------- fronts

struct FrontRow {
    double targeted = 0.0;
    double random = 0.0;
    std::uint64_t id = 0;
};

std::vector<Individual> sorted_front(const std::vector<Individual>& population)
{
    std::vector<Individual> front;
    for (auto& ind : nondominated(population))
        if (ind.model) front.push_back(std::move(ind));
    std::sort(front.begin(), front.end(), [](const Individual& a, const Individual& b) {
        if (a.objectives.targeted != b.objectives.targeted)
            return a.objectives.targeted < b.objectives.targeted;
        return a.id < b.id;
    });
    return front;
}

void write_front(const fs::path& dir, const std::vector<Individual>& population)
{
    const auto front = sorted_front(population);
    fs::create_directories(dir / "models");
    std::string csv = "R_targeted,R_random,model_id\n";
    for (const auto& ind : front) {
        csv += num(ind.objectives.targeted) + "," + num(ind.objectives.random) + "," +
               std::to_string(ind.id) + "\n";
        write_model(dir / "models" / (std::to_string(ind.id) + ".json"), *ind.model);
    }
    write_text(dir / "front.csv", csv);
}

std::vector<FrontRow> read_front(const fs::path& dir)
{
    const fs::path path = dir / "front.csv";
    std::ifstream in(path);
    if (!in) throw DataError("missing run artifact " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != "R_targeted,R_random,model_id")
        throw DataError(path.string() + ": unexpected header");
    std::vector<FrontRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string a, b, c;
        if (!std::getline(fields, a, ',') || !std::getline(fields, b, ',') || !std::getline(fields, c))
            throw DataError(path.string() + ": malformed row '" + line + "'");
        try {
            rows.push_back({std::stod(a), std::stod(b), std::stoull(c)});
        } catch (const std::exception&) {
            throw DataError(path.string() + ": malformed row '" + line + "'");
        }
    }
    return rows;
}

void write_failures(const fs::path& path, const std::vector<EvaluationFailure>& failures)
{
    std::string text;
    for (const auto& f : failures) text += std::to_string(f.id) + "\t" + f.message + "\n";
    write_text(path, text);
}

// largest change of either robustness value caused by a reduction
double robustness_drift(const BlockModel& original, const BlockModel& reduced)
{
    if (reduced.blocks() == original.blocks()) return 0.0;
    const RobustnessPair a = robustness_pair(original);
    const RobustnessPair b = robustness_pair(reduced);
    return std::max(std::abs(a.targeted - b.targeted), std::abs(a.random - b.random));
}

constexpr double kDriftWarning = 1e-3;

// ---------------------------------------------------------------- commands

int cmd_robustness(const fs::path& model_path, const std::string& schedule_name, int grid,
                   const fs::path& out_dir, std::ostream& out, std::ostream& err)
{
    const BlockModel model = load_model(model_path, err);
    const Schedule schedule = parse_schedule(schedule_name);
    const Percolation perc(model);
    const SCurve curve = perc.curve(schedule, grid);
    const SCurve other = perc.curve(schedule == Schedule::Random ? Schedule::Targeted : Schedule::Random, grid);
    const double r_targeted = schedule == Schedule::Targeted ? curve.robustness : other.robustness;
    const double r_random = schedule == Schedule::Random ? curve.robustness : other.robustness;

    std::string csv = "q,S\n";
    for (std::size_t i = 0; i < curve.q_grid.size(); ++i)
        csv += num(curve.q_grid[i]) + "," + num(curve.s_values[i]) + "\n";
    write_text(out_dir / "s_curve.csv", csv);
    write_text(out_dir / "robustness.csv",
               "R_targeted,R_random\n" + num(r_targeted) + "," + num(r_random) + "\n");
    out << "R=" << num(curve.robustness) << "\n";
    return kExitOk;
}

int cmd_reduce(const fs::path& model_path, double epsilon, const fs::path& out_dir, std::ostream& out,
               std::ostream& err)
{
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon: must be positive");
    const BlockModel model = load_model(model_path, err);
    const auto [reduced, report] = reduce(model, epsilon);
    const double drift = robustness_drift(model, reduced);
    if (drift >= kDriftWarning)
        err << "warning: reduction moved a robustness value by " << num(drift) << "\n";
    fs::create_directories(out_dir);
    write_model(out_dir / "reduced_model.json", reduced);
    write_text(out_dir / "reduction_report.json", to_json(report).dump(2) + "\n");
    out << "B=" << report.original_blocks << " -> " << report.reduced_blocks << "\n";
    return kExitOk;
}

int cmd_validate(const fs::path& model_path, const std::string& schedule_name, std::size_t nodes,
                 int trials, int grid, std::uint64_t seed, const fs::path& out_dir, std::ostream& out,
                 std::ostream& err)
{
    const BlockModel model = load_model(model_path, err);
    const Schedule schedule = parse_schedule(schedule_name);
    const SCurve analytic = s_curve(model, schedule, grid);
    Rng rng(seed);
    const McCurve mc = mc_robustness(model, schedule, nodes, grid, trials, rng);

    std::string csv = "q,S_analytic,S_mc,stderr\n";
    for (int i = 0; i < grid; ++i)
        csv += num(analytic.q_grid[i]) + "," + num(analytic.s_values[i]) + "," + num(mc.giant[i].mean) +
               "," + num(mc.giant[i].error) + "\n";
    csv += "R," + num(analytic.robustness) + "," + num(mc.robustness.mean) + "," +
           num(mc.robustness.error) + "\n";
    write_text(out_dir / "validation.csv", csv);
    out << "R_analytic=" << num(analytic.robustness) << " R_mc=" << num(mc.robustness.mean)
        << " stderr=" << num(mc.robustness.error) << "\n";
    return kExitOk;
}

nlohmann::json checkpoint_json(const RunConfig& config, const OptimizerState& state)
{
    return {{"config", to_json(config)}, {"state", to_json(state)}};
}

std::optional<OptimizerState> load_checkpoint(const fs::path& path, const RunConfig& config)
{
    if (!fs::exists(path)) return std::nullopt;
    const nlohmann::json doc = read_json(path, "checkpoint");
    if (!doc.is_object() || !doc.contains("config") || !doc.contains("state"))
        throw DataError("checkpoint " + path.string() + " is corrupt: missing config or state");
    if (doc.at("config") != to_json(config))
        throw DataError("checkpoint " + path.string() +
                        " was written with a different configuration; remove it or use another output directory");
    try {
        return optimizer_state_from_json(doc.at("state"), config.optimizer);
    } catch (const std::exception& e) {
        throw DataError("checkpoint " + path.string() + " is corrupt: " + e.what());
    }
}

int cmd_optimize(const fs::path& config_path, std::optional<std::uint64_t> seed,
                 std::optional<std::string> output, std::ostream& out)
{
    RunConfig config = read_run_config(config_path);
    if (seed) config.optimizer.seed = *seed;
    if (output) config.output = *output;
    check_config(config.optimizer);

    const fs::path dir = run_directory(config);
    const fs::path checkpoint = dir / "checkpoint.json";
    const auto saved = load_checkpoint(checkpoint, config);
    fs::create_directories(dir);
    write_text(dir / "config.json", to_json(config).dump(2) + "\n");
    const Evaluator evaluator = robustness_evaluator(config.optimizer.grid_size);
    const long interval = config.optimizer.snapshot_interval;

    if (config.mode == RunConfig::Mode::Front) {
        SmsEmoa opt(config.optimizer, evaluator);
        if (saved) {
            opt.restore(*saved);
            out << "resuming at evaluation " << saved->evaluations << "\n";
        } else {
            opt.initialize();
            write_front(dir / "gen0", opt.population());
            write_text(checkpoint, checkpoint_json(config, opt.state()).dump() + "\n");
        }
        while (!opt.finished()) {
            opt.step();
            const long evals = opt.state().evaluations;
            if (evals % interval == 0 || opt.finished()) {
                write_front(dir / ("gen" + std::to_string(evals)), opt.population());
                write_text(checkpoint, checkpoint_json(config, opt.state()).dump() + "\n");
            }
        }
        const OptimizerState state = opt.state();
        write_front(dir, state.population);
        write_failures(dir / "failures.log", state.failures);
        out << "evaluations=" << state.evaluations << " front=" << sorted_front(state.population).size()
            << " hypervolume=" << num(population_hypervolume(state.population, config.optimizer.reference))
            << " failures=" << state.failures.size() << "\n";
        return kExitOk;
    }

    ConstrainedSearch search(config.optimizer, config.constraint, evaluator);
    if (saved) {
        search.restore(*saved);
        out << "resuming at evaluation " << saved->evaluations << "\n";
    } else {
        search.initialize();
        write_text(checkpoint, checkpoint_json(config, search.state()).dump() + "\n");
    }
    while (!search.finished()) {
        search.step();
        const long evals = search.state().evaluations;
        if (evals % interval == 0 || search.finished())
            write_text(checkpoint, checkpoint_json(config, search.state()).dump() + "\n");
    }
    const OptimizerState state = search.state();
    const bool found = state.best_feasible.has_value();
    const Individual& best = found ? *state.best_feasible : *state.best_attempt;
    std::string csv = "target,tolerance,found,R_targeted,R_random,model_id\n";
    csv += num(config.constraint.target) + "," + num(config.constraint.tolerance) + "," +
           (found ? "1" : "0") + "," + num(best.objectives.targeted) + "," + num(best.objectives.random) +
           "," + (best.model ? std::to_string(best.id) : "") + "\n";
    fs::create_directories(dir / "models");
    if (best.model) write_model(dir / "models" / (std::to_string(best.id) + ".json"), *best.model);
    write_text(dir / "constrained.csv", csv);
    write_failures(dir / "failures.log", state.failures);
    out << "found=" << (found ? 1 : 0) << " R_targeted=" << num(best.objectives.targeted)
        << " R_random=" << num(best.objectives.random) << "\n";
    return kExitOk;
}

int cmd_front_report(const fs::path& run_dir, std::optional<double> epsilon,
                     std::optional<std::string> output, std::ostream& out)
{
    if (!fs::is_directory(run_dir)) throw DataError("run directory " + run_dir.string() + " does not exist");
    double eps = kDefaultMergeThreshold;
    if (fs::exists(run_dir / "config.json"))
        eps = run_config_from_json(read_json(run_dir / "config.json", "run configuration")).epsilon;
    if (epsilon) eps = *epsilon;
    if (!(eps > 0.0)) throw std::invalid_argument("epsilon: must be positive");
    const fs::path out_dir = output ? fs::path(*output) : run_dir / "report";

    const auto rows = read_front(run_dir);
    std::string tradeoff = "rank,model_id,R_targeted,R_random,B_original,B_reduced,R_drift\n";
    std::string sizes = "rank,model_id,R_targeted,block,n\n";
    std::string degrees = "rank,model_id,R_targeted,block,kappa,log10_kappa\n";
    std::string hinton = "rank,model_id,R_targeted,r,s,e,log10_e\n";

    for (std::size_t rank = 0; rank < rows.size(); ++rank) {
        const FrontRow& row = rows[rank];
        const fs::path model_path = run_dir / "models" / (std::to_string(row.id) + ".json");
        if (!fs::exists(model_path)) throw DataError("missing run artifact " + model_path.string());
        const BlockModel original = read_model(model_path);
        const BlockModel model = reduce(original, eps).first;

        const Eigen::VectorXd kappa = model.block_degrees();
        std::vector<int> order(model.blocks());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return kappa(a) > kappa(b); });

        const std::string prefix = std::to_string(rank) + "," + std::to_string(row.id) + "," + num(row.targeted);
        tradeoff += prefix + "," + num(row.random) + "," + std::to_string(original.blocks()) + "," +
                    std::to_string(model.blocks()) + "," + num(robustness_drift(original, model)) + "\n";
        for (int i = 0; i < model.blocks(); ++i) {
            const int r = order[i];
            sizes += prefix + "," + std::to_string(i) + "," + num(model.size(r)) + "\n";
            degrees += prefix + "," + std::to_string(i) + "," + num(kappa(r)) + "," + num(std::log10(kappa(r))) + "\n";
            for (int j = 0; j < model.blocks(); ++j) {
                const double e = model.edge(r, order[j]);
                hinton += prefix + "," + std::to_string(i) + "," + std::to_string(j) + "," + num(e) + "," +
                          (e > 0.0 ? num(std::log10(e)) : std::string("-inf")) + "\n";
            }
        }
    }
    write_text(out_dir / "tradeoff.csv", tradeoff);
    write_text(out_dir / "block_sizes.csv", sizes);
    write_text(out_dir / "mean_degree.csv", degrees);
    write_text(out_dir / "hinton.csv", hinton);
    out << "front members=" << rows.size() << " report=" << out_dir.string() << "\n";
    return kExitOk;
}

}  // namespace

bool RunConfig::operator==(const RunConfig& o) const
{
    return mode == o.mode && optimizer == o.optimizer && constraint.target == o.constraint.target &&
           constraint.tolerance == o.constraint.tolerance && constraint.penalty == o.constraint.penalty &&
           epsilon == o.epsilon && nodes == o.nodes && trials == o.trials && output == o.output;
}

nlohmann::json to_json(const RunConfig& c)
{
    return {{"mode", c.mode == RunConfig::Mode::Front ? "front" : "constrained"},
            {"optimizer", to_json(c.optimizer)},
            {"constraint",
             {{"target", c.constraint.target},
              {"tolerance", c.constraint.tolerance},
              {"penalty", c.constraint.penalty}}},
            {"epsilon", c.epsilon},
            {"oracle", {{"nodes", c.nodes}, {"trials", c.trials}}},
            {"output", c.output}};
}

RunConfig run_config_from_json(const nlohmann::json& doc)
{
    if (!doc.is_object()) throw std::invalid_argument("run configuration: expected an object");
    RunConfig c;
    for (const auto& item : doc.items()) {
        const std::string& key = item.key();
        if (key == "mode") {
            const auto mode = get<std::string>(doc, key);
            if (mode == "front") c.mode = RunConfig::Mode::Front;
            else if (mode == "constrained") c.mode = RunConfig::Mode::Constrained;
            else throw std::invalid_argument("mode: expected front or constrained, got '" + mode + "'");
        } else if (key == "optimizer") {
            c.optimizer = opt_config_from_json(item.value());
        } else if (key == "constraint") {
            c.constraint = constraint_from_json(item.value());
        } else if (key == "epsilon") {
            c.epsilon = get<double>(doc, key);
        } else if (key == "oracle") {
            const auto& o = item.value();
            if (!o.is_object()) throw std::invalid_argument("oracle: expected an object");
            for (const auto& sub : o.items()) {
                if (sub.key() == "nodes") c.nodes = get<std::size_t>(o, "nodes");
                else if (sub.key() == "trials") c.trials = get<int>(o, "trials");
                else throw std::invalid_argument("oracle." + sub.key() + ": unknown key");
            }
        } else if (key == "output") {
            c.output = get<std::string>(doc, key);
        } else {
            throw std::invalid_argument(key + ": unknown key");
        }
    }
    if (!(c.epsilon > 0.0)) throw std::invalid_argument("epsilon: must be positive");
    if (c.trials < 1) throw std::invalid_argument("oracle.trials: must be at least 1");
    return c;
}

RunConfig read_run_config(const fs::path& path)
{
    return run_config_from_json(read_json(path, "run configuration"));
}

fs::path run_directory(const RunConfig& config)
{
    return fs::path(config.output) / "run" / std::to_string(config.optimizer.seed);
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Robustness of stochastic block model networks"};
    app.require_subcommand(1);

    std::string model;
    std::string config;
    std::string schedule = "random";
    int grid = kDefaultGridSize;
    double epsilon = kDefaultMergeThreshold;
    std::size_t nodes = 100'000;
    int trials = 5;
    std::uint64_t seed = 1;
    std::string out_dir = ".";
    std::string run_dir;
    const auto schedules = CLI::IsMember({"random", "targeted"});

    auto* robustness = app.add_subcommand("robustness", "S(q) curve and robustness of a model");
    robustness->add_option("--model", model, "model file")->required();
    robustness->add_option("--schedule", schedule, "removal schedule")->check(schedules);
    robustness->add_option("--grid", grid, "q-grid points (odd)");
    robustness->add_option("--out", out_dir, "output directory");

    auto* optimize = app.add_subcommand("optimize", "Pareto front or constrained search");
    optimize->add_option("--config", config, "run configuration file")->required();
    auto* seed_opt = optimize->add_option("--seed", seed, "override the configured seed");
    auto* out_opt = optimize->add_option("--out", out_dir, "override the configured output directory");

    auto* reduce_cmd = app.add_subcommand("reduce", "merge equivalent blocks");
    reduce_cmd->add_option("--model", model, "model file")->required();
    reduce_cmd->add_option("--epsilon", epsilon, "merge threshold");
    reduce_cmd->add_option("--out", out_dir, "output directory");

    auto* validate_cmd = app.add_subcommand("validate", "compare with finite-network simulation");
    validate_cmd->add_option("--model", model, "model file")->required();
    validate_cmd->add_option("--schedule", schedule, "removal schedule")->check(schedules);
    validate_cmd->add_option("--nodes", nodes, "network size");
    validate_cmd->add_option("--trials", trials, "independent networks");
    auto* validate_grid = validate_cmd->add_option("--grid", grid, "q-grid points (odd), default 51");
    validate_cmd->add_option("--seed", seed, "random seed");
    validate_cmd->add_option("--out", out_dir, "output directory");

    auto* report = app.add_subcommand("front-report", "structure tables along a final front");
    report->add_option("run_dir", run_dir, "seed directory of an optimize run")->required();
    auto* report_eps = report->add_option("--epsilon", epsilon, "merge threshold");
    auto* report_out = report->add_option("--out", out_dir, "output directory, default <run_dir>/report");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (robustness->parsed()) return cmd_robustness(model, schedule, grid, out_dir, out, err);
        if (reduce_cmd->parsed()) return cmd_reduce(model, epsilon, out_dir, out, err);
        if (validate_cmd->parsed()) {
            if (validate_grid->count() == 0) grid = 51;
            return cmd_validate(model, schedule, nodes, trials, grid, seed, out_dir, out, err);
        }
        if (optimize->parsed())
            return cmd_optimize(config, seed_opt->count() ? std::optional(seed) : std::nullopt,
                                out_opt->count() ? std::optional(out_dir) : std::nullopt, out);
        if (report->parsed())
            return cmd_front_report(run_dir, report_eps->count() ? std::optional(epsilon) : std::nullopt,
                                    report_out->count() ? std::optional(out_dir) : std::nullopt, out);
    } catch (const ConvergenceError& e) {
        err << "error: " << e.what() << "\n";
        return kExitNonConvergence;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}

}  // namespace sbmrobust
