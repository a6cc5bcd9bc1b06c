#pragma once

#include "sbmrobust/entropy.hpp"
#include "sbmrobust/optimizer.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>

namespace sbmrobust {

enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,
    kExitData = 2,
    kExitNonConvergence = 3,
};

/*
 * Configuration file of `optimize`:
 *
 *   {
 *     "mode": "front" | "constrained",
 *     "optimizer": { OptConfig keys },
 *     "constraint": {"target": 0, "tolerance": 0.005, "penalty": 10},
 *     "epsilon": 0.025,
 *     "oracle": {"nodes": 100000, "trials": 5},
 *     "output": "out"
 *   }
 *
 * Every key is optional; unknown keys are rejected.
 */
struct RunConfig {
    enum class Mode { Front, Constrained };

    Mode mode = Mode::Front;
    OptConfig optimizer;
    ConstraintSpec constraint;
    double epsilon = kDefaultMergeThreshold;
    std::size_t nodes = 100'000;
    int trials = 5;
    std::string output = "out";

    bool operator==(const RunConfig&) const;
};

nlohmann::json to_json(const RunConfig& config);
/// Throws std::invalid_argument naming the offending key.
RunConfig run_config_from_json(const nlohmann::json& doc);
RunConfig read_run_config(const std::filesystem::path& path);

/// Seed directory of an optimize run: <output>/run/<seed>.
std::filesystem::path run_directory(const RunConfig& config);

/// Entry point of the command-line tool. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sbmrobust
