#pragma once

#include <string>

#include <json.hpp>

#include "hillscope/core.hpp"

namespace hillscope {

/// Parsed scenario file: the mechanical system plus one tagged experiment.
/// The experiment block is schema-checked per kind; unknown keys anywhere are
/// rejected with the offending key path.
struct ScenarioConfig {
    MechanicalSystem system;
    std::string kind;
    nlohmann::json experiment;
    std::string source_path;
};

ScenarioConfig parse_scenario(const nlohmann::json& j, const std::string& source = "<inline>");
ScenarioConfig load_scenario(const std::string& path);

/// Known experiment kinds (equal to the CLI subcommands that accept them).
const std::vector<std::string>& experiment_kinds();

}  // namespace hillscope
