#pragma once

#include <vector>

#include "spmarket/model.hpp"

namespace spmarket {

/// Scalar bid parameters: one per consumer (theta_d) and one per supplier (theta_s).
struct BidProfile {
    std::vector<double> theta_d;
    std::vector<double> theta_s;

    double total() const;
    /// Number of strictly positive components across both sides.
    std::size_t positive_count() const;
};

/// Quantities and the clearing price (equivalently the multiplier of the balance constraint).
struct Allocation {
    std::vector<double> d;
    std::vector<double> s;
    double lam = 0.0;

    double total_demand() const;
    double total_supply() const;
};

/// d0 + theta / p. Throws DomainError for p <= 0.
double demand_bid(double theta, double p, double d0);

/// kappa0 - theta / p. Not clamped: a result below zero means theta exceeds p * kappa0.
double supply_offer(double theta, double p, double kappa0);

/// (sum theta_d + sum theta_s) / (N*kappa0 - M*d0), the unique price at which the bid
/// demand equals the offered supply. Throws DomainError when every bid is zero, since the
/// price is then undefined, and ConfigError on a dimension mismatch or a negative bid.
double clearing_price(const MarketConfig& config, const BidProfile& bids);

/// Quantities implied by a bid profile at its clearing price.
Allocation allocation_from_bids(const MarketConfig& config, const BidProfile& bids);

/// Residual supply index (N-1)*kappa0 / (M*d0); +infinity when M*d0 = 0.
double rsi(const MarketConfig& config);

/// RSI < 1: the others' capacity cannot cover the inelastic demand.
bool has_pivotal_supplier(const MarketConfig& config);

/// Strict non-pivotal condition the Nash analysis needs: (N-1)*kappa0 - M*d0 > 0.
/// RSI = 1 exactly is excluded because the modified cost divides by that quantity.
bool admits_nash_equilibrium(const MarketConfig& config);

/// 1 - max_i C_i'(s_i) / lam for an allocation with its price.
double lerner_index(const MarketConfig& config, const Allocation& allocation);

/// Lerner index of a bid profile, evaluated at its clearing price and implied supplies.
double lerner_index(const MarketConfig& config, const BidProfile& bids);

}  // namespace spmarket
