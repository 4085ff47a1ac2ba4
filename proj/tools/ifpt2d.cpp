#include "ifpt/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

void add_common(CLI::App* cmd, ifpt::CommandOptions& opt, bool with_run_flags) {
    cmd->add_option("--config", opt.config_path, "run configuration file")->required();
    if (!with_run_flags) return;
    cmd->add_option("--seed", opt.seed, "random seed (overrides config)");
    cmd->add_option("--out", opt.out_dir, "output directory (overrides config)");
    cmd->add_option("--threads", opt.threads, "worker threads, 0 = all cores");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Inverse first-passage boundaries for the two-compartment OU model"};
    app.require_subcommand(1);
    ifpt::CommandOptions opt;

    auto* solve = app.add_subcommand("solve", "solve the boundary for the configured target law");
    add_common(solve, opt, true);

    auto* verify = app.add_subcommand("verify", "forward-simulate a boundary and test the crossing law");
    add_common(verify, opt, true);
    verify->add_option("--boundary", opt.boundary_path, "boundary CSV from solve")->required();
    verify->add_option("--ks-threshold", opt.ks_threshold, "pass threshold (default 0.05)");

    auto* transform = app.add_subcommand("transform", "input schedule for a constant threshold");
    add_common(transform, opt, true);
    transform->add_option("--boundary", opt.boundary_path, "boundary CSV from solve")->required();
    transform->add_option("--sigma-level", opt.sigma_level, "constant threshold level");
    transform->add_option("--ks-threshold", opt.ks_threshold, "pass threshold (default 0.02)");

    auto* moments = app.add_subcommand("moments", "print mean and covariance at given times");
    add_common(moments, opt, false);
    moments->add_option("--times", opt.times, "times, comma separated")->required()->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : ifpt::kExitConfig;
    }

    if (*solve) return ifpt::cmd_solve(opt, std::cout, std::cerr);
    if (*verify) return ifpt::cmd_verify(opt, std::cout, std::cerr);
    if (*transform) return ifpt::cmd_transform(opt, std::cout, std::cerr);
    return ifpt::cmd_moments(opt, std::cout, std::cerr);
}
