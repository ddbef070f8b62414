// drocc: sample-based distributionally robust chance-constrained solver and
// experiment harness. Commands read a JSON config and emit one CSV table.

#include <exception>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "drocc/experiments.hpp"

namespace {

int run(const std::string& command, const std::string& config_path,
        const std::string& output_override, bool verbose) {
    nlohmann::json raw;
    {
        std::ifstream in(config_path);
        if (!in) throw drocc::ConfigError("cannot open config file: " + config_path);
        try {
            in >> raw;
        } catch (const nlohmann::json::exception& e) {
            throw drocc::ConfigError(std::string{"config is not valid JSON: "} + e.what());
        }
    }

    drocc::ExperimentConfig cfg = drocc::parse_config(raw);
    cfg.verbose = verbose;
    if (drocc::parse_command(command) != cfg.command)
        throw drocc::ConfigError("config command '" + raw.at("command").get<std::string>() +
                                 "' does not match subcommand '" + command + "'");

    if (verbose) std::cerr << "running " << command << " from " << config_path << "\n";
    const drocc::CsvTable table = drocc::run_experiment(cfg);

    const std::string target = output_override.empty() ? cfg.output_path : output_override;
    if (target.empty()) {
        table.write(std::cout);
    } else {
        std::ofstream out(target, std::ios::binary);
        if (!out) throw drocc::Error("cannot open output file: " + target);
        table.write(out);
        if (verbose) std::cerr << "wrote " << table.rows.size() << " rows to " << target << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sample-based distributionally robust chance-constrained toolkit"};
    app.require_subcommand(1);

    std::string config_path, output_override;
    bool verbose = false;
    std::string chosen;
    for (const std::string name : {"solve", "bounds", "converge", "beta-study", "coverage"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "experiment config (JSON)")->required();
        sub->add_option("--output", output_override, "CSV output path (overrides config)");
        sub->add_flag("--verbose", verbose, "progress notes on stderr");
        sub->callback([&chosen, name] { chosen = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        std::cerr << e.what() << "\n";
        return 2;
    }

    try {
        return run(chosen, config_path, output_override, verbose);
    } catch (const drocc::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
