#pragma once

#include <cstddef>
#include <vector>

#include "spmarket/mechanism.hpp"
#include "spmarket/model.hpp"
#include "spmarket/solver.hpp"

namespace spmarket {

/// Which side of its box an agent sits on. Consumers are never `upper`.
enum class Branch { interior, lower, upper };

std::string_view to_string(Branch branch);

/// Per-agent stationarity violations. Agents are indexed consumers first (0..M-1), then
/// suppliers (M..M+N-1).
struct KktReport {
    std::vector<double> residuals;
    std::vector<Branch> branches;
    std::size_t worst_agent = 0;
    double worst_residual = 0.0;
    double clearing_residual = 0.0;  ///< |sum d - sum s|
};

/**
 * Evaluates the optimality conditions of `mode` at an allocation. With m the agent's
 * (modified, in nash mode) marginal and lam the price:
 *
 *   consumer interior   |m - lam|          consumer at d0     max(0, m - lam)
 *   supplier interior   |m - lam|          supplier at 0      max(0, lam - m)
 *                                          supplier at kappa0 max(0, m - lam)
 *
 * An agent is on a bound when it lies within `box_tol` of it.
 */
KktReport kkt_residuals(const MarketConfig& config, Mode mode, const Allocation& allocation,
                        double box_tol = 1e-9);
KktReport kkt_residuals(const MarketConfig& config, const EquilibriumReport& report,
                        double box_tol = 1e-9);

/// Price-anticipating payoff of consumer i when it bids theta_i and everyone else bids as in
/// `others` (whose i-th demand entry is ignored). Throws DomainError when the resulting total
/// bid is zero.
double consumer_payoff(const MarketConfig& config, std::size_t i, double theta_i,
                       const BidProfile& others);
/// Same for supplier i. Offers implying negative supply cost nothing.
double supplier_payoff(const MarketConfig& config, std::size_t i, double theta_i,
                       const BidProfile& others);

/// Largest offer of supplier i that keeps its supply nonnegative with the other bids fixed:
/// kappa0 / ((N-1) kappa0 - M d0) * (sum theta_d + sum_{j != i} theta_s). Infinite on a
/// market where that denominator is not positive.
double supplier_theta_max(const MarketConfig& config, std::size_t i, const BidProfile& bids);

struct PlayerScan {
    double candidate_payoff = 0.0;
    double best_payoff = 0.0;
    double best_theta = 0.0;
    double upper = 0.0;       ///< right end of the scanned interval
    double gap = 0.0;         ///< candidate_payoff - best_payoff
    bool best_at_cap = false; ///< maximum found at the (heuristic) right end of the scan
};

struct BestResponseReport {
    std::vector<PlayerScan> players;  ///< consumers first, then suppliers
    std::vector<double> theta_max;    ///< per supplier
    int grid_points = 0;
    double tol = 0.0;
    std::size_t worst_player = 0;
    bool certified = false;

    std::vector<double> gaps() const;
};

/**
 * Scans each player's payoff in its own bid with everyone else fixed: a uniform grid over
 * [0, upper] refined by golden-section search around the best cell. Consumers scan up to
 * 10 * p * zeta, suppliers up to their theta_max. The profile is certified when no player
 * gains more than tol * max(1, |payoff|) and no consumer maximum sits at the scan cap.
 */
BestResponseReport verify_best_response(const MarketConfig& config, const BidProfile& bids,
                                        int grid_points = 2001, double tol = 1e-6);

/// Derivative of supplier i's payoff in its own offer at `bids`.
double supplier_payoff_slope(const MarketConfig& config, std::size_t i, const BidProfile& bids);

/**
 * On a market with RSI <= 1, checks that every supplier's payoff slope is positive at `bids`
 * and at 10x the bids, i.e. raising the offer always pays and no best response exists.
 * Throws PreconditionError on a market where (N-1) kappa0 > M d0.
 */
bool detect_pivotal_unboundedness(const MarketConfig& config, const BidProfile& bids);

}  // namespace spmarket
