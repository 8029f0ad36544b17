#include "fixcon/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv)
{
    CLI::App app{"Fixed-time leader-follower consensus simulator"};
    app.set_version_flag("--version", fixcon::version());
    app.require_subcommand(1);

    fixcon::RunOptions run;
    auto* run_cmd = app.add_subcommand("run", "Validate, simulate, analyze and export one config");
    run_cmd->add_option("--config", run.config, "Config file (JSON)")->required();
    run_cmd->add_option("--out", run.out, "Output directory")->required();
    run_cmd->add_option("--set", run.overrides, "Override a config key, e.g. sim.dt=5e-4");
    run_cmd->add_option("--stride", run.stride, "Record every k-th step");

    fixcon::SweepOptions sweep;
    auto* sweep_cmd = app.add_subcommand("sweep", "Run one config over a list of parameter values");
    sweep_cmd->add_option("--config", sweep.config, "Config file (JSON)")->required();
    sweep_cmd->add_option("--out", sweep.out, "Output directory")->required();
    sweep_cmd->add_option("--param", sweep.parameter, "ic_scale, dt, or a dotted config key")->required();
    sweep_cmd->add_option("--values", sweep.values, "Comma-separated values")->delimiter(',');
    sweep_cmd->add_option("--set", sweep.overrides, "Override a config key");
    sweep_cmd->add_option("--stride", sweep.stride, "Record every k-th step");
    sweep_cmd->add_option("--threads", sweep.threads, "Concurrent runs (0 = hardware)");

    std::filesystem::path validate_config;
    std::vector<std::string> validate_overrides;
    auto* validate_cmd = app.add_subcommand("validate", "Print topology and gain reports without simulating");
    validate_cmd->add_option("--config", validate_config, "Config file (JSON)")->required();
    validate_cmd->add_option("--set", validate_overrides, "Override a config key");

    fixcon::LemmaOptions lemmas;
    auto* lemma_cmd = app.add_subcommand("lemmas", "Randomized checks of the algebraic inequalities");
    lemma_cmd->add_option("--seed", lemmas.seed, "Base RNG seed");
    lemma_cmd->add_option("--trials", lemmas.trials, "Trials per inequality");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : fixcon::kExitConfigInvalid;
    }

    if (*run_cmd)
        return fixcon::cmd_run(run, std::cout, std::cerr);
    if (*sweep_cmd)
        return fixcon::cmd_sweep(sweep, std::cout, std::cerr);
    if (*validate_cmd)
        return fixcon::cmd_validate(validate_config, validate_overrides, std::cout, std::cerr);
    return fixcon::cmd_lemmas(lemmas, std::cout);
}
