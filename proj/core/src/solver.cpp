#include "spmarket/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

#include "spmarket/errors.hpp"
#include "spmarket/verify.hpp"

namespace spmarket {

namespace {

constexpr int kMaxBracketExpansions = 200;

// Root of a decreasing f on [lo, hi] with f(lo) > target > f(hi).
template <class F>
double decreasing_root(F&& f, double lo, double hi, double target, double tol) {
    for (;;) {
        const double mid = lo + 0.5 * (hi - lo);
        if (mid <= lo || mid >= hi) break;
        if (hi - lo <= tol * std::max(1.0, std::abs(mid))) break;
        if (f(mid) > target)
            lo = mid;
        else
            hi = mid;
    }
    return lo + 0.5 * (hi - lo);
}

std::string pivotal_message(const MarketConfig& config) {
    std::ostringstream msg;
    msg << "no Nash equilibrium: a supplier is pivotal (RSI = " << rsi(config)
        << ", (N-1)*kappa0 - M*d0 = " << config.supply_span() << "); RSI > 1 is required";
    return msg.str();
}

void require_nash_market(const MarketConfig& config) {
    if (!admits_nash_equilibrium(config)) throw PivotalSupplierError(pivotal_message(config), rsi(config));
}

struct Responses {
    std::vector<double> d;
    std::vector<double> s;
};

Responses responses_at(const MarketConfig& config, double lam, Mode mode, double inner_tol) {
    Responses r;
    r.d.resize(config.n_consumers());
    r.s.resize(config.n_suppliers());
    for (std::size_t i = 0; i < r.d.size(); ++i) r.d[i] = agent_demand_at(config, i, lam, mode, inner_tol);
    for (std::size_t i = 0; i < r.s.size(); ++i) r.s[i] = agent_supply_at(config, i, lam, mode, inner_tol);
    return r;
}

double excess_of(const Responses& r) {
    return std::accumulate(r.d.begin(), r.d.end(), 0.0) - std::accumulate(r.s.begin(), r.s.end(), 0.0);
}

// The bracket [lo, hi] has collapsed to adjacent doubles but the market does not clear: some
// agents jump between their responses at lo and hi (flat marginals, or responses too steep to
// resolve in double precision). Start from the responses at hi, where supply exceeds demand,
// and hand the shortfall out in equal shares to the agents that move, capped at each agent's
// jump.
Responses split_ties(const MarketConfig& config, double lo, double hi, Mode mode, double inner_tol) {
    const Responses at_lo = responses_at(config, lo, mode, inner_tol);
    Responses out = responses_at(config, hi, mode, inner_tol);
    const std::size_t M = out.d.size();

    struct Slack {
        double room;
        std::size_t agent;
    };
    std::vector<Slack> movers;
    for (std::size_t i = 0; i < M; ++i)
        if (at_lo.d[i] > out.d[i]) movers.push_back({at_lo.d[i] - out.d[i], i});
    for (std::size_t j = 0; j < out.s.size(); ++j)
        if (out.s[j] > at_lo.s[j]) movers.push_back({out.s[j] - at_lo.s[j], M + j});
    std::stable_sort(movers.begin(), movers.end(),
                     [](const Slack& a, const Slack& b) { return a.room < b.room; });

    double need = -excess_of(out);
    std::size_t left = movers.size();
    for (const Slack& m : movers) {
        const double take = std::min(need / static_cast<double>(left), m.room);
        if (m.agent < M)
            out.d[m.agent] += take;
        else
            out.s[m.agent - M] -= take;
        need -= take;
        --left;
    }
    return out;
}

}  // namespace

std::string_view to_string(Mode mode) { return mode == Mode::nash ? "nash" : "efficient"; }

Mode parse_mode(std::string_view name) {
    if (name == "efficient") return Mode::efficient;
    if (name == "nash") return Mode::nash;
    throw ConfigError("unknown mode '" + std::string(name) + "' (expected efficient or nash)");
}

void SolveSettings::validate() const {
    auto positive = [](double x) { return x > 0.0 && std::isfinite(x); };
    if (!positive(lambda_tol)) throw ConfigError("lambda_tol must be positive");
    if (!positive(clear_tol)) throw ConfigError("clear_tol must be positive");
    if (!positive(inner_tol)) throw ConfigError("inner_tol must be positive");
    if (max_iter < 1) throw ConfigError("max_iter must be >= 1");
    if (!positive(initial_lambda)) throw ConfigError("initial_lambda must be positive");
}

double efficient_demand_cap(const MarketConfig& config) { return config.d0() + 10.0 * config.zeta(); }

double agent_demand_at(const MarketConfig& config, std::size_t i, double lam, Mode mode,
                       double inner_tol) {
    if (!(lam > 0.0)) throw DomainError("multiplier must be positive");
    const double d0 = config.d0();
    const UtilitySpec& u = config.utility(i);

    if (mode == Mode::nash) {
        const double span = config.demand_span();
        auto marginal = [&](double d) { return (1.0 - d / span) * utility_marginal(u, d0, d); };
        if (marginal(d0) <= lam) return d0;
        // marginal(span) = 0 < lam, so the root is interior
        return decreasing_root(marginal, d0, span, lam, inner_tol);
    }

    const double cap = efficient_demand_cap(config);
    auto marginal = [&](double d) { return utility_marginal(u, d0, d); };
    if (marginal(d0) <= lam) return d0;
    if (marginal(cap) >= lam) return cap;
    return decreasing_root(marginal, d0, cap, lam, inner_tol);
}

double agent_supply_at(const MarketConfig& config, std::size_t i, double lam, Mode mode,
                       double inner_tol) {
    if (!(lam > 0.0)) throw DomainError("multiplier must be positive");
    if (mode == Mode::nash) require_nash_market(config);
    const double kappa0 = config.kappa0();
    const CostSpec& c = config.cost(i);
    const double span = config.supply_span();

    auto marginal = [&](double s) {
        const double m = cost_marginal(c, s, kappa0);
        return mode == Mode::nash ? (1.0 + s / span) * m : m;
    };
    if (marginal(0.0) >= lam) return 0.0;
    if (marginal(kappa0) <= lam) return kappa0;
    // -marginal is decreasing; reuse the decreasing root finder
    auto neg = [&](double s) { return -marginal(s); };
    return decreasing_root(neg, 0.0, kappa0, -lam, inner_tol);
}

double excess_demand(const MarketConfig& config, double lam, Mode mode, double inner_tol) {
    return excess_of(responses_at(config, lam, mode, inner_tol));
}

BidProfile recover_bids(const MarketConfig& config, const Allocation& allocation) {
    BidProfile bids;
    bids.theta_d.reserve(allocation.d.size());
    bids.theta_s.reserve(allocation.s.size());
    for (double d : allocation.d) bids.theta_d.push_back(std::max(0.0, allocation.lam * (d - config.d0())));
    for (double s : allocation.s) bids.theta_s.push_back(std::max(0.0, allocation.lam * (config.kappa0() - s)));
    return bids;
}

BidProfile nash_bid_profile(const EquilibriumReport& report) {
    if (report.mode != Mode::nash) throw PreconditionError("nash_bid_profile needs a nash-mode report");
    return report.bids;
}

EquilibriumReport solve(const MarketConfig& config, Mode mode, const SolveSettings& settings) {
    settings.validate();
    if (mode == Mode::nash) require_nash_market(config);

    int iterations = 0;
    auto excess = [&](double lam) {
        ++iterations;
        return excess_demand(config, lam, mode, settings.inner_tol);
    };

    // Bracket a sign change: E(lo) >= 0 >= E(hi).
    double lo = 0.5 * settings.initial_lambda;
    double hi = 2.0 * settings.initial_lambda;
    double e_lo = excess(lo);
    double e_hi = excess(hi);
    for (int k = 0; e_lo < 0.0; ++k) {
        if (k >= kMaxBracketExpansions)
            throw BracketError("excess demand stays negative as the price goes to zero");
        hi = lo;
        e_hi = e_lo;
        lo *= 0.5;
        e_lo = excess(lo);
    }
    for (int k = 0; e_hi > 0.0; ++k) {
        if (k >= kMaxBracketExpansions)
            throw BracketError("excess demand stays positive as the price grows");
        lo = hi;
        e_lo = e_hi;
        hi *= 2.0;
        e_hi = excess(hi);
    }

    std::optional<double> lam;
    Responses quantities;
    if (e_lo == 0.0) {
        lam = lo;
    } else if (e_hi == 0.0) {
        lam = hi;
    } else {
        bool collapsed = false;
        for (int it = 0; it < settings.max_iter; ++it) {
            const double mid = lo + 0.5 * (hi - lo);
            if (mid <= lo || mid >= hi) {
                collapsed = true;
                break;
            }
            const double e = excess(mid);
            if (e > 0.0)
                lo = mid;
            else
                hi = mid;
            if (e == 0.0 || (hi - lo <= settings.lambda_tol * mid && std::abs(e) <= settings.clear_tol)) {
                lam = mid;
                break;
            }
        }
        if (!lam && !collapsed) {
            std::ostringstream msg;
            msg << "price bisection did not converge within " << settings.max_iter
                << " iterations (bracket [" << lo << ", " << hi << "])";
            throw IterationLimitError(msg.str());
        }
        if (!lam) {
            quantities = split_ties(config, lo, hi, mode, settings.inner_tol);
            lam = lo;
        }
    }
    if (quantities.d.empty()) quantities = responses_at(config, *lam, mode, settings.inner_tol);

    EquilibriumReport report;
    report.mode = mode;
    report.allocation.d = std::move(quantities.d);
    report.allocation.s = std::move(quantities.s);
    report.allocation.lam = *lam;
    report.iterations = iterations;

    const double imbalance = report.allocation.total_demand() - report.allocation.total_supply();
    if (!(std::abs(imbalance) <= settings.clear_tol)) {
        std::ostringstream msg;
        msg << "market does not clear at the converged price: |sum d - sum s| = " << std::abs(imbalance);
        throw IterationLimitError(msg.str());
    }
    if (mode == Mode::efficient) {
        const double cap = efficient_demand_cap(config);
        for (double d : report.allocation.d)
            if (d >= cap) throw BracketError("efficient demand cap is active at the solution");
    }

    report.bids = recover_bids(config, report.allocation);
    report.welfare = social_welfare(config, report.allocation.d, report.allocation.s);
    if (mode == Mode::nash)
        report.modified_welfare = modified_social_welfare(config, report.allocation.d, report.allocation.s);
    report.lerner = lerner_index(config, report.allocation);
    report.kkt_residual = kkt_residuals(config, mode, report.allocation, settings.clear_tol).worst_residual;
    return report;
}

}  // namespace spmarket
