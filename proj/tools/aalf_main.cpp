#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "aalf/pipeline.hpp"

namespace {

struct CliOverrides {
    std::string config_path;
    std::uint64_t seed = 0;
    std::string out;
    int threads = 0;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"AALF: constrained selection between a linear and a black-box forecaster"};
    app.set_version_flag("--version", std::string(AALF_VERSION));
    app.fallthrough();
    app.require_subcommand(1);

    CliOverrides cli;
    auto* config_opt = app.add_option("--config", cli.config_path, "experiment config (JSON)");
    auto* seed_opt = app.add_option("--seed", cli.seed, "override the master seed");
    auto* out_opt = app.add_option("--out", cli.out, "override the output directory");
    auto* threads_opt = app.add_option("--threads", cli.threads, "override the worker count");

    app.add_subcommand("ingest", "parse the dataset, filter unusable series, freeze the splits");
    app.add_subcommand("train-base", "fit the linear forecaster f and the global forecaster g");
    app.add_subcommand("oracle", "sweep the optimal-selection loss floor on the test segments");
    app.add_subcommand("fit-selector", "label validation steps and fit the selection classifiers");
    app.add_subcommand("evaluate", "run the fitted selector on the test segments");
    app.add_subcommand("report", "aggregate all stage outputs into report.json and summary.txt");

    CLI11_PARSE(app, argc, argv);

    try {
        aalf::ExperimentConfig cfg;
        if (config_opt->count() > 0) cfg = aalf::load_config(cli.config_path);
        if (seed_opt->count() > 0) cfg.seed = cli.seed;
        if (out_opt->count() > 0) cfg.out = cli.out;
        if (threads_opt->count() > 0) {
            if (cli.threads < 1) throw aalf::ConfigError("--threads must be >= 1");
            cfg.threads = cli.threads;
        }

        const std::string command = app.get_subcommands().front()->get_name();
        if (command == "ingest") {
            aalf::cmd_ingest(cfg);
        } else if (command == "train-base") {
            aalf::cmd_train_base(cfg);
        } else if (command == "oracle") {
            aalf::cmd_oracle(cfg);
        } else if (command == "fit-selector") {
            aalf::cmd_fit_selector(cfg);
        } else if (command == "evaluate") {
            aalf::cmd_evaluate(cfg);
        } else {
            aalf::cmd_report(cfg);
        }
    } catch (const std::exception& e) {
        std::cerr << "aalf: error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
