// Single entry point: config -> staged pipeline. Stages persist their
// artifacts under the configured output directory, so any stage can be rerun
// or resumed independently.
//
// Exit codes: 0 success, 1 configuration/validation error, 2 runtime failure.

#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "evload/config.hpp"
#include "evload/pipeline.hpp"

int main(int argc, char** argv) {
    CLI::App app{"EV charging load forecasting benchmark pipeline"};
    std::string config_path;
    std::string stage = "all";
    int jobs = 0;
    bool overwrite = false;
    app.add_option("--config", config_path, "Run configuration JSON")->required();
    app.add_option("--stage", stage,
                   "Stage to run: ingest, series, features, train, forecast, report, all");
    app.add_option("--jobs", jobs, "Worker cap for within-stage parallelism");
    app.add_flag("--overwrite", overwrite,
                 "Replace artifacts produced by a different configuration");
    CLI11_PARSE(app, argc, argv);

    try {
        evload::RunConfig cfg = evload::load_config(config_path);
        if (const char* env = std::getenv("EVLOAD_OUTPUT_DIR"); env && *env)
            cfg.output_dir = env;
        if (jobs > 0) cfg.jobs = jobs;
        auto problems = evload::validate_config(cfg);
        if (!problems.empty()) {
            std::cerr << "invalid config " << config_path << ":\n";
            for (const auto& p : problems) std::cerr << "  - " << p << "\n";
            return 1;
        }
        evload::Pipeline pipeline(std::move(cfg), overwrite);
        pipeline.run(stage);
        std::cout << "stage '" << stage << "' complete; artifacts in "
                  << pipeline.config().output_dir << "\n";
        return 0;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
