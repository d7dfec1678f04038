#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "../src/runner.hpp"

using namespace hillscope;

int main(int argc, char** argv) {
    CLI::App app{"hillscope: numerical laboratory for near-boundary geodesic geometry"};
    app.require_subcommand(1);

    RunFlags flags;
    std::string scenario_path;

    std::vector<CLI::App*> subs;
    for (const std::string& kind : experiment_kinds()) {
        CLI::App* sub = app.add_subcommand(kind);
        sub->add_option("scenario", scenario_path, "scenario JSON file")->required();
        sub->add_option("--out", flags.out_dir, "output directory (default ./out)");
        sub->add_flag("--svg,!--no-svg", flags.svg, "emit SVG figures");
        sub->add_option("--threads", flags.threads,
                        "worker threads (0 = all cores; never affects numerical output)");
        sub->add_option("--seed", flags.seed, "reserved; pipelines are deterministic grids");
        sub->add_flag("--flip", flags.flip, "flip the family figure vertically");
        subs.push_back(sub);
    }

    CLI11_PARSE(app, argc, argv);

    CLI::App* active = app.get_subcommands().front();
    try {
        ScenarioConfig cfg = load_scenario(scenario_path);
        RunManifest manifest;
        int rc = run_subcommand(active->get_name(), cfg, flags, manifest);
        for (const auto& c : manifest.checks)
            std::printf("%s %s\n", c.pass ? "PASS" : "FAIL", c.name.c_str());
        return rc;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
