#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "hillscope/scenario.hpp"

namespace hillscope {

struct RunFlags {
    std::string out_dir = "./out";
    bool svg = true;
    unsigned threads = 0;       ///< 0 = all cores; never affects numerical output
    std::uint64_t seed = 0;     ///< reserved; current pipelines are deterministic grids
    bool flip = false;          ///< vertical flip for the thrown-ball family view
};

struct CheckResult {
    std::string name;
    bool pass = false;
};

struct RunManifest {
    std::string scenario;
    nlohmann::json config_echo;
    std::vector<std::string> outputs;
    std::vector<CheckResult> checks;
    double wall_seconds = 0.0;

    bool all_pass() const;
    nlohmann::json to_json() const;
};

/// Executes one subcommand against a parsed scenario; writes outputs and the
/// manifest under flags.out_dir. Returns 0 on success, 1 when a check failed.
int run_subcommand(const std::string& command, const ScenarioConfig& cfg, const RunFlags& flags,
                   RunManifest& manifest);

}  // namespace hillscope
