#pragma once

#include <optional>
#include <string_view>

#include "spmarket/mechanism.hpp"
#include "spmarket/model.hpp"

namespace spmarket {

/// efficient: price-taking agents, maximizes true welfare.
/// nash: price-anticipating agents, maximizes the modified welfare.
enum class Mode { efficient, nash };

std::string_view to_string(Mode mode);
Mode parse_mode(std::string_view name);

struct SolveSettings {
    double lambda_tol = 1e-12;  ///< relative width of the final price bracket
    double clear_tol = 1e-9;    ///< bound on |sum d - sum s|
    double inner_tol = 1e-13;   ///< per-agent scalar root tolerance
    int max_iter = 200;         ///< bisection cap on the price
    double initial_lambda = 1.0;  ///< initial bracket is [initial/2, 2*initial]

    /// Throws ConfigError when a tolerance is not positive or max_iter < 1.
    void validate() const;
};

struct EquilibriumReport {
    Mode mode = Mode::efficient;
    Allocation allocation;
    BidProfile bids;  ///< recovered: theta_d = lam (d - d0), theta_s = lam (kappa0 - s)
    double welfare = 0.0;
    std::optional<double> modified_welfare;  ///< nash mode only
    double lerner = 0.0;
    double kkt_residual = 0.0;
    int iterations = 0;
};

/// Demand cap used in efficient mode so linear utilities have a finite response: d0 + 10*zeta.
double efficient_demand_cap(const MarketConfig& config);

/**
 * Consumer i's optimal quantity when the balance multiplier is lam: the root of the strictly
 * decreasing marginal (U' or (1 - d/A_d) U') equal to lam, or d0 when the marginal at d0 is
 * already <= lam. Flat marginals (linear utility, efficient mode) return d0 at equality and
 * the cap below it.
 */
double agent_demand_at(const MarketConfig& config, std::size_t i, double lam, Mode mode,
                       double inner_tol = 1e-13);

/// Supplier i's optimal quantity on [0, kappa0] at multiplier lam. Nash mode throws
/// PivotalSupplierError on a market without a Nash equilibrium.
double agent_supply_at(const MarketConfig& config, std::size_t i, double lam, Mode mode,
                       double inner_tol = 1e-13);

/// sum_i agent_demand_at - sum_i agent_supply_at, summed in index order. Nonincreasing in lam.
double excess_demand(const MarketConfig& config, double lam, Mode mode, double inner_tol = 1e-13);

/**
 * Solves the allocation problem of the given mode by bisection on the single balance
 * multiplier. Each bisection step solves M + N independent scalar problems.
 *
 * Throws PivotalSupplierError (nash mode on a market with (N-1)*kappa0 <= M*d0),
 * BracketError, IterationLimitError.
 */
EquilibriumReport solve(const MarketConfig& config, Mode mode, const SolveSettings& settings = {});

/// theta_d = lam (d - d0), theta_s = lam (kappa0 - s).
BidProfile recover_bids(const MarketConfig& config, const Allocation& allocation);

/// The unique Nash bid vector of a nash-mode report. Throws PreconditionError otherwise.
BidProfile nash_bid_profile(const EquilibriumReport& report);

}  // namespace spmarket
