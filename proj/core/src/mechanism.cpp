#include "spmarket/mechanism.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "spmarket/errors.hpp"

namespace spmarket {

double BidProfile::total() const {
    return std::accumulate(theta_d.begin(), theta_d.end(), 0.0) +
           std::accumulate(theta_s.begin(), theta_s.end(), 0.0);
}

std::size_t BidProfile::positive_count() const {
    auto positive = [](double t) { return t > 0.0; };
    return static_cast<std::size_t>(std::count_if(theta_d.begin(), theta_d.end(), positive) +
                                    std::count_if(theta_s.begin(), theta_s.end(), positive));
}

double Allocation::total_demand() const { return std::accumulate(d.begin(), d.end(), 0.0); }
double Allocation::total_supply() const { return std::accumulate(s.begin(), s.end(), 0.0); }

double demand_bid(double theta, double p, double d0) {
    if (!(p > 0.0)) throw DomainError("demand bid needs a positive price");
    return d0 + theta / p;
}

double supply_offer(double theta, double p, double kappa0) {
    if (!(p > 0.0)) throw DomainError("supply offer needs a positive price");
    return kappa0 - theta / p;
}

namespace {

void check_bids(const MarketConfig& config, const BidProfile& bids) {
    if (bids.theta_d.size() != config.n_consumers() || bids.theta_s.size() != config.n_suppliers()) {
        std::ostringstream msg;
        msg << "bid profile has " << bids.theta_d.size() << " demand and " << bids.theta_s.size()
            << " supply parameters; market has M = " << config.n_consumers()
            << ", N = " << config.n_suppliers();
        throw ConfigError(msg.str());
    }
    auto bad = [](double t) { return !(t >= 0.0) || !std::isfinite(t); };
    if (std::any_of(bids.theta_d.begin(), bids.theta_d.end(), bad) ||
        std::any_of(bids.theta_s.begin(), bids.theta_s.end(), bad))
        throw ConfigError("bid parameters must be finite and nonnegative");
}

}  // namespace

double clearing_price(const MarketConfig& config, const BidProfile& bids) {
    check_bids(config, bids);
    const double total = bids.total();
    if (!(total > 0.0)) throw DomainError("clearing price undefined: every bid parameter is zero");
    return total / config.zeta();
}

Allocation allocation_from_bids(const MarketConfig& config, const BidProfile& bids) {
    Allocation a;
    a.lam = clearing_price(config, bids);
    a.d.reserve(bids.theta_d.size());
    a.s.reserve(bids.theta_s.size());
    for (double t : bids.theta_d) a.d.push_back(demand_bid(t, a.lam, config.d0()));
    for (double t : bids.theta_s) a.s.push_back(supply_offer(t, a.lam, config.kappa0()));
    return a;
}

double rsi(const MarketConfig& config) {
    const double inelastic = static_cast<double>(config.n_consumers()) * config.d0();
    if (inelastic == 0.0) return std::numeric_limits<double>::infinity();
    return (static_cast<double>(config.n_suppliers()) - 1.0) * config.kappa0() / inelastic;
}

bool has_pivotal_supplier(const MarketConfig& config) { return rsi(config) < 1.0; }

bool admits_nash_equilibrium(const MarketConfig& config) { return config.supply_span() > 0.0; }

double lerner_index(const MarketConfig& config, const Allocation& allocation) {
    if (!(allocation.lam > 0.0)) throw DomainError("Lerner index needs a positive price");
    if (allocation.s.size() != config.n_suppliers())
        throw ConfigError("allocation supply vector does not match N");
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < allocation.s.size(); ++i)
        worst = std::max(worst, cost_marginal(config.cost(i), allocation.s[i], config.kappa0()));
    return 1.0 - worst / allocation.lam;
}

double lerner_index(const MarketConfig& config, const BidProfile& bids) {
    const Allocation a = allocation_from_bids(config, bids);
    for (double s : a.s)
        if (s < 0.0) throw DomainError("bid profile implies negative supply");
    return lerner_index(config, a);
}

}  // namespace spmarket
