#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "spmarket/analysis.hpp"
#include "spmarket/model.hpp"
#include "spmarket/solver.hpp"

namespace spmarket::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;       ///< I/O or validation failure
inline constexpr int kExitPivotal = 2;       ///< Nash solve refused: pivotal supplier
inline constexpr int kExitNotCertified = 3;  ///< a player can improve on the given bids

/// Command-line overrides applied on top of a scenario's settings.
struct SettingsOverrides {
    std::optional<double> lambda_tol;
    std::optional<double> clear_tol;
    std::optional<double> inner_tol;
    std::optional<int> max_iter;

    SolveSettings apply(SolveSettings base) const;
};

struct SolveArgs {
    std::filesystem::path scenario;
    Mode mode = Mode::nash;
    std::string format = "json";  ///< json | table
    SettingsOverrides overrides;
};

struct VerifyArgs {
    std::filesystem::path scenario;
    std::optional<std::filesystem::path> bids;  ///< unset: use --from-solve
    int grid_points = 2001;
    double tol = 1e-6;
    SettingsOverrides overrides;
};

struct SweepArgs {
    std::filesystem::path scenario;
    SweepAxis axis = SweepAxis::kappa0;
    double from = 0.0;
    double to = 0.0;
    int steps = 1;
    std::string format = "csv";  ///< csv | json
    unsigned threads = 1;
    SettingsOverrides overrides;
};

struct ReproArgs {
    std::optional<std::filesystem::path> out_dir;
    unsigned threads = 1;
};

struct CurveArgs {
    std::string side = "demand";  ///< demand | supply
    double theta = 1.0;
    double floor_or_capacity = 1.0;  ///< d0 for demand, kappa0 for supply
    double p_min = 0.1;
    double p_max = 5.0;
    int points = 50;
};

int cmd_solve(const SolveArgs& args, std::ostream& out, std::ostream& err);
int cmd_verify(const VerifyArgs& args, std::ostream& out, std::ostream& err);
int cmd_sweep(const SweepArgs& args, std::ostream& out, std::ostream& err);
int cmd_repro(const ReproArgs& args, std::ostream& out, std::ostream& err);
int cmd_curve(const CurveArgs& args, std::ostream& out, std::ostream& err);

/// Six suppliers with quadratic costs, five log-utility consumers, d0 = 1.
MarketConfig reference_market(double kappa0 = 1.1);

struct ReproCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct ReproOutcome {
    SweepResult kappa0_sweep;
    SweepResult consumer_sweep;
    std::vector<ReproCheck> checks;
};

/// kappa0 from 1.1 to 4.0 in steps of 0.1, and n_consumers from 1 to 9 at kappa0 = 2.
ReproOutcome run_reference_repro(unsigned threads = 1);

/// Degree of parallelism from SPMARKET_THREADS; 1 when unset or invalid.
unsigned threads_from_env();

}  // namespace spmarket::cli
