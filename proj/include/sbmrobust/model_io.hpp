#pragma once

#include "sbmrobust/blockmodel.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace sbmrobust {

/// Model documents: {"B": <int>, "n": [B numbers], "e": [[B numbers] x B]}.
/// Asymmetry up to 1e-9 relative is averaged away on read; more is rejected.
/// Errors are InvalidModel with the offending field named in the message.
BlockModel model_from_json(const nlohmann::json& doc);
nlohmann::json model_to_json(const BlockModel& model);

BlockModel read_model(const std::filesystem::path& path);
void write_model(const std::filesystem::path& path, const BlockModel& model);

}  // namespace sbmrobust
