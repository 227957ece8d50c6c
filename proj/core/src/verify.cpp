#include "spmarket/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "spmarket/errors.hpp"

namespace spmarket {

std::string_view to_string(Branch branch) {
    switch (branch) {
        case Branch::interior: return "interior";
        case Branch::lower: return "lower";
        case Branch::upper: return "upper";
    }
    return "unknown";
}

KktReport kkt_residuals(const MarketConfig& config, Mode mode, const Allocation& allocation,
                        double box_tol) {
    const std::size_t M = config.n_consumers();
    const std::size_t N = config.n_suppliers();
    if (allocation.d.size() != M || allocation.s.size() != N)
        throw ConfigError("allocation dimensions do not match the market");
    const double lam = allocation.lam;
    const double d0 = config.d0();
    const double kappa0 = config.kappa0();

    KktReport r;
    r.residuals.reserve(M + N);
    r.branches.reserve(M + N);

    for (std::size_t i = 0; i < M; ++i) {
        // Points within box_tol outside the box are evaluated on the bound.
        const double d = allocation.d[i] < d0 && allocation.d[i] >= d0 - box_tol ? d0 : allocation.d[i];
        const double m = mode == Mode::nash ? modified_utility_marginal(config, i, d)
                                            : utility_marginal(config.utility(i), d0, d);
        if (d <= d0 + box_tol) {
            r.branches.push_back(Branch::lower);
            r.residuals.push_back(std::max(0.0, m - lam));
        } else {
            r.branches.push_back(Branch::interior);
            r.residuals.push_back(std::abs(m - lam));
        }
    }
    for (std::size_t j = 0; j < N; ++j) {
        double s = allocation.s[j];
        if (s < 0.0 && s >= -box_tol) s = 0.0;
        if (s > kappa0 && s <= kappa0 + box_tol) s = kappa0;
        const double m = mode == Mode::nash ? modified_cost_marginal(config, j, s)
                                            : cost_marginal(config.cost(j), s, kappa0);
        if (s <= box_tol) {
            r.branches.push_back(Branch::lower);
            r.residuals.push_back(std::max(0.0, lam - m));
        } else if (s >= kappa0 - box_tol) {
            r.branches.push_back(Branch::upper);
            r.residuals.push_back(std::max(0.0, m - lam));
        } else {
            r.branches.push_back(Branch::interior);
            r.residuals.push_back(std::abs(m - lam));
        }
    }

    const auto worst = std::max_element(r.residuals.begin(), r.residuals.end());
    r.worst_agent = static_cast<std::size_t>(worst - r.residuals.begin());
    r.worst_residual = *worst;
    r.clearing_residual = std::abs(allocation.total_demand() - allocation.total_supply());
    return r;
}

KktReport kkt_residuals(const MarketConfig& config, const EquilibriumReport& report, double box_tol) {
    return kkt_residuals(config, report.mode, report.allocation, box_tol);
}

namespace {

double others_total(const BidProfile& bids, bool consumer, std::size_t i) {
    return bids.total() - (consumer ? bids.theta_d.at(i) : bids.theta_s.at(i));
}

double price_with(const MarketConfig& config, double theta_i, double others) {
    const double total = theta_i + others;
    if (!(total > 0.0)) throw DomainError("payoff undefined: every bid parameter is zero");
    return total / config.zeta();
}

double consumer_payoff_given(const MarketConfig& config, std::size_t i, double theta, double others) {
    const double p = price_with(config, theta, others);
    const double d = config.d0() + theta / p;
    return utility_value(config.utility(i), config.d0(), d) - p * config.d0() - theta;
}

double supplier_payoff_given(const MarketConfig& config, std::size_t i, double theta, double others) {
    const double p = price_with(config, theta, others);
    const double s = config.kappa0() - theta / p;
    return p * config.kappa0() - theta - cost_value_extended(config.cost(i), s);
}

void check_dimensions(const MarketConfig& config, const BidProfile& bids) {
    if (bids.theta_d.size() != config.n_consumers() || bids.theta_s.size() != config.n_suppliers())
        throw ConfigError("bid profile dimensions do not match the market");
}

// Maximizes f over [a, b] assuming unimodality.
template <class F>
std::pair<double, double> golden_max(F&& f, double a, double b) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1);
    double f2 = f(x2);
    for (int k = 0; k < 200 && b - a > 1e-15 * std::max(1.0, std::abs(b)); ++k) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
    }
    return f1 >= f2 ? std::pair{x1, f1} : std::pair{x2, f2};
}

template <class F>
PlayerScan scan_player(F&& payoff, double candidate, double upper, int grid_points) {
    constexpr double kNegInf = -std::numeric_limits<double>::infinity();
    auto safe = [&](double theta) {
        try {
            return payoff(theta);
        } catch (const DomainError&) {
            return kNegInf;
        }
    };

    PlayerScan scan;
    scan.upper = upper;
    scan.candidate_payoff = safe(candidate);

    const int n = std::max(grid_points, 3);
    const double h = upper / static_cast<double>(n - 1);
    int best_k = 0;
    double best = kNegInf;
    for (int k = 0; k < n; ++k) {
        const double v = safe(h * k);
        if (v > best) {
            best = v;
            best_k = k;
        }
    }
    double best_theta = h * best_k;
    const double a = h * std::max(best_k - 1, 0);
    const double b = h * std::min(best_k + 1, n - 1);
    const auto [x, fx] = golden_max(safe, a, b);
    if (fx > best) {
        best = fx;
        best_theta = x;
    }
    scan.best_payoff = best;
    scan.best_theta = best_theta;
    scan.best_at_cap = best_k == n - 1;
    scan.gap = scan.candidate_payoff - best;
    return scan;
}

}  // namespace

double consumer_payoff(const MarketConfig& config, std::size_t i, double theta_i, const BidProfile& others) {
    check_dimensions(config, others);
    return consumer_payoff_given(config, i, theta_i, others_total(others, true, i));
}

double supplier_payoff(const MarketConfig& config, std::size_t i, double theta_i, const BidProfile& others) {
    check_dimensions(config, others);
    return supplier_payoff_given(config, i, theta_i, others_total(others, false, i));
}

double supplier_theta_max(const MarketConfig& config, std::size_t i, const BidProfile& bids) {
    const double span = config.supply_span();
    if (!(span > 0.0)) return std::numeric_limits<double>::infinity();
    return config.kappa0() / span * others_total(bids, false, i);
}

std::vector<double> BestResponseReport::gaps() const {
    std::vector<double> out;
    out.reserve(players.size());
    for (const PlayerScan& p : players) out.push_back(p.gap);
    return out;
}

BestResponseReport verify_best_response(const MarketConfig& config, const BidProfile& bids,
                                        int grid_points, double tol) {
    check_dimensions(config, bids);
    const double p = clearing_price(config, bids);
    const double consumer_cap = 10.0 * p * config.zeta();

    BestResponseReport report;
    report.grid_points = grid_points;
    report.tol = tol;
    report.certified = true;

    double worst = std::numeric_limits<double>::infinity();
    auto record = [&](PlayerScan scan, bool consumer) {
        const double allowed = tol * std::max(1.0, std::abs(scan.candidate_payoff));
        if (scan.gap < -allowed || !std::isfinite(scan.gap)) report.certified = false;
        if (consumer && scan.best_at_cap) report.certified = false;
        const double scaled = scan.gap / std::max(1.0, std::abs(scan.candidate_payoff));
        if (scaled < worst) {
            worst = scaled;
            report.worst_player = report.players.size();
        }
        report.players.push_back(scan);
    };

    for (std::size_t i = 0; i < config.n_consumers(); ++i) {
        const double others = others_total(bids, true, i);
        auto payoff = [&](double t) { return consumer_payoff_given(config, i, t, others); };
        record(scan_player(payoff, bids.theta_d[i], consumer_cap, grid_points), true);
    }
    for (std::size_t j = 0; j < config.n_suppliers(); ++j) {
        const double others = others_total(bids, false, j);
        double upper = supplier_theta_max(config, j, bids);
        const bool capped = !std::isfinite(upper);
        if (capped) upper = consumer_cap;
        report.theta_max.push_back(upper);
        auto payoff = [&](double t) { return supplier_payoff_given(config, j, t, others); };
        PlayerScan scan = scan_player(payoff, bids.theta_s[j], upper, grid_points);
        // theta_max is a hard bound only on a non-pivotal market
        if (!capped) scan.best_at_cap = false;
        record(scan, capped);
    }
    return report;
}

double supplier_payoff_slope(const MarketConfig& config, std::size_t i, const BidProfile& bids) {
    check_dimensions(config, bids);
    const double zeta = config.zeta();
    const double total = bids.total();
    if (!(total > 0.0)) throw DomainError("payoff slope undefined: every bid parameter is zero");
    const double others = total - bids.theta_s.at(i);
    const double p = total / zeta;
    const double s = config.kappa0() - bids.theta_s[i] / p;
    return config.kappa0() / zeta - 1.0 +
           zeta * cost_marginal_extended(config.cost(i), s) * others / (total * total);
}

bool detect_pivotal_unboundedness(const MarketConfig& config, const BidProfile& bids) {
    if (admits_nash_equilibrium(config))
        throw PreconditionError("unboundedness test needs a market with a pivotal supplier (RSI <= 1)");
    BidProfile scaled = bids;
    for (double& t : scaled.theta_d) t *= 10.0;
    for (double& t : scaled.theta_s) t *= 10.0;
    for (std::size_t j = 0; j < config.n_suppliers(); ++j) {
        if (!(supplier_payoff_slope(config, j, bids) > 0.0)) return false;
        if (!(supplier_payoff_slope(config, j, scaled) > 0.0)) return false;
    }
    return true;
}

}  // namespace spmarket
