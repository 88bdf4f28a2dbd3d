// Batch front end: cusplab run <config.json> [--output DIR] [--seed N]
// [--max-dim N].  Exit 0 all verdicts pass, 2 verdict failure, 1 config or
// validation error.

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "cusplab/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"cusplab: cusp/funnel graph Laplacian workbench"};
    app.require_subcommand(1);
    CLI::App* run = app.add_subcommand("run", "run one experiment from a JSON config");
    std::string config_path;
    std::string output_override;
    std::int64_t seed_override = -1;
    int max_dim_override = -1;
    run->add_option("config", config_path, "experiment config (JSON)")->required();
    run->add_option("--output", output_override, "output directory (overrides config)");
    run->add_option("--seed", seed_override, "probe-vector seed (overrides config)");
    run->add_option("--max-dim", max_dim_override, "dense eigensolver cap (overrides config)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        cusplab::ExperimentConfig cfg = cusplab::load_config(config_path);
        if (!output_override.empty()) {
            cfg.output = output_override;
            cfg.echo["output"] = cfg.output;
        }
        if (seed_override >= 0) {
            cfg.seed = std::uint64_t(seed_override);
            cfg.echo["seed"] = cfg.seed;
        }
        if (max_dim_override > 0) {
            cfg.max_dim = max_dim_override;
            cfg.echo["max_dim"] = cfg.max_dim;
        }
        cusplab::Report rep = cusplab::run_experiment(cfg);
        std::string path = rep.write(cfg.output);
        bool pass = rep.all_pass();
        for (const auto& v : rep.verdicts)
            std::printf("%-32s %s\n", v.name.c_str(), v.pass ? "pass" : "FAIL");
        std::printf("report: %s\n", path.c_str());
        return pass ? 0 : 2;
    } catch (const cusplab::InvalidArgument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
