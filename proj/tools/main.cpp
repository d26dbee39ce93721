#include <CLI11.hpp>

#include <exception>
#include <iostream>
#include <string>

#include "sclab/experiment.hpp"
#include "sclab/solver.hpp"

int main(int argc, char** argv) {
    CLI::App app{"sclab: stochastic scalar conservation law laboratory"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::string resume_path;

    auto* run_cmd = app.add_subcommand("run", "run the experiment described by a config file");
    run_cmd->add_option("config", config_path, "config file")->required();
    run_cmd->add_option("--out", out_dir, "output directory (default: out)");
    run_cmd->add_option("--resume", resume_path, "checkpoint to resume from");

    auto* validate_cmd = app.add_subcommand("validate", "check a config file");
    validate_cmd->add_option("config", config_path, "config file")->required();

    auto* catalog_cmd = app.add_subcommand("catalog", "list built-in models and experiments");

    CLI11_PARSE(app, argc, argv);

    try {
        if (catalog_cmd->parsed()) {
            std::cout << sclab::catalog_text();
            return 0;
        }
        const sclab::ExperimentConfig config = sclab::load_config_file(config_path);
        if (validate_cmd->parsed()) {
            sclab::validate_config(config);
            std::cout << "ok\n";
            return 0;
        }
        sclab::run_experiment(config, out_dir, resume_path);
        return 0;
    } catch (const sclab::SolverError& e) {
        std::cerr << "numerical abort: " << e.what() << '\n';
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid configuration: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
