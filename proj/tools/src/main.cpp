#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "spmarket/errors.hpp"
#include "spmarket_cli/commands.hpp"

using namespace spmarket;
using namespace spmarket::cli;

namespace {

void add_overrides(CLI::App* cmd, SettingsOverrides& o) {
    cmd->add_option("--lambda-tol", o.lambda_tol, "Relative price bracket tolerance");
    cmd->add_option("--clear-tol", o.clear_tol, "Market clearing tolerance");
    cmd->add_option("--inner-tol", o.inner_tol, "Per-agent root-finding tolerance");
    cmd->add_option("--max-iter", o.max_iter, "Price bisection iteration limit");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Solver and checker for the scalar-parameterized two-sided market"};
    app.require_subcommand(1);
    const unsigned threads = threads_from_env();

    SolveArgs solve_args;
    std::string solve_mode = "nash";
    auto* solve_cmd = app.add_subcommand("solve", "Compute the efficient or Nash equilibrium");
    solve_cmd->add_option("scenario", solve_args.scenario, "Scenario JSON file")->required();
    solve_cmd->add_option("--mode", solve_mode, "efficient | nash")
        ->check(CLI::IsMember({"efficient", "nash"}));
    solve_cmd->add_option("--format", solve_args.format, "json | table")
        ->check(CLI::IsMember({"json", "table"}));
    add_overrides(solve_cmd, solve_args.overrides);

    VerifyArgs verify_args;
    std::string bids_path;
    auto* verify_cmd = app.add_subcommand("verify", "Check KKT conditions and best responses for a bid profile");
    verify_cmd->add_option("scenario", verify_args.scenario, "Scenario JSON file")->required();
    auto* bids_opt = verify_cmd->add_option("--bids", bids_path, "Bids JSON file");
    auto* from_solve = verify_cmd->add_flag("--from-solve", "Verify the solver's Nash bids");
    bids_opt->excludes(from_solve);
    verify_cmd->add_option("--grid", verify_args.grid_points, "Grid points per best-response scan")
        ->check(CLI::Range(3, 10'000'000));
    verify_cmd->add_option("--tol", verify_args.tol, "Relative payoff improvement tolerance")
        ->check(CLI::PositiveNumber);
    add_overrides(verify_cmd, verify_args.overrides);

    SweepArgs sweep_args;
    sweep_args.threads = threads;
    std::string axis = "kappa0";
    auto* sweep_cmd = app.add_subcommand("sweep", "Sweep kappa0 or the consumer count");
    sweep_cmd->add_option("scenario", sweep_args.scenario, "Scenario JSON file")->required();
    sweep_cmd->add_option("--axis", axis, "kappa0 | n_consumers")
        ->check(CLI::IsMember({"kappa0", "n_consumers"}));
    sweep_cmd->add_option("--from", sweep_args.from, "First axis value")->required();
    sweep_cmd->add_option("--to", sweep_args.to, "Last axis value")->required();
    sweep_cmd->add_option("--steps", sweep_args.steps, "Number of points, endpoints included")->required();
    sweep_cmd->add_option("--format", sweep_args.format, "csv | json")
        ->check(CLI::IsMember({"csv", "json"}));
    add_overrides(sweep_cmd, sweep_args.overrides);

    ReproArgs repro_args;
    repro_args.threads = threads;
    std::string out_dir;
    auto* repro_cmd = app.add_subcommand("repro", "Run the reference six-supplier, five-consumer experiments");
    repro_cmd->add_option("--out-dir", out_dir, "Write the sweep CSVs here instead of stdout");

    CurveArgs curve_args;
    auto* curve_cmd = app.add_subcommand("curve", "Sample a parametric demand or supply curve");
    curve_cmd->add_option("--side", curve_args.side, "demand | supply")
        ->check(CLI::IsMember({"demand", "supply"}));
    curve_cmd->add_option("--theta", curve_args.theta, "Bid or offer parameter");
    curve_cmd->add_option("--base", curve_args.floor_or_capacity, "d0 for demand, kappa0 for supply");
    curve_cmd->add_option("--pmin", curve_args.p_min, "Lowest price");
    curve_cmd->add_option("--pmax", curve_args.p_max, "Highest price");
    curve_cmd->add_option("--points", curve_args.points, "Number of samples");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInvalid;
    }

    if (*solve_cmd) {
        solve_args.mode = parse_mode(solve_mode);
        return cmd_solve(solve_args, std::cout, std::cerr);
    }
    if (*verify_cmd) {
        if (*bids_opt) {
            verify_args.bids = bids_path;
        } else if (!*from_solve) {
            std::cerr << "error: verify needs --bids FILE or --from-solve\n";
            return kExitInvalid;
        }
        return cmd_verify(verify_args, std::cout, std::cerr);
    }
    if (*sweep_cmd) {
        sweep_args.axis = parse_sweep_axis(axis);
        return cmd_sweep(sweep_args, std::cout, std::cerr);
    }
    if (*repro_cmd) {
        if (!out_dir.empty()) repro_args.out_dir = out_dir;
        return cmd_repro(repro_args, std::cout, std::cerr);
    }
    return cmd_curve(curve_args, std::cout, std::cerr);
}
