#include "spmarket/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include "spmarket/errors.hpp"

namespace spmarket {

std::string_view to_string(BoundRegime regime) {
    switch (regime) {
        case BoundRegime::subcritical: return "subcritical";
        case BoundRegime::moderate: return "moderate";
        case BoundRegime::ample: return "ample";
    }
    return "unknown";
}

BoundRegime bound_regime(const MarketConfig& config) {
    const double ratio = config.zeta() / config.kappa0();
    if (ratio >= 4.0) return BoundRegime::ample;
    if (ratio >= 2.0) return BoundRegime::moderate;
    return BoundRegime::subcritical;
}

double welfare(const MarketConfig& config, const Allocation& allocation, double clear_tol) {
    if (allocation.d.size() != config.n_consumers() || allocation.s.size() != config.n_suppliers())
        throw DomainError("allocation dimensions do not match the market");
    for (double d : allocation.d)
        if (d < config.d0()) throw DomainError("allocation gives a consumer less than d0");
    for (double s : allocation.s)
        if (s < 0.0 || s > config.kappa0()) throw DomainError("allocation supply outside [0, kappa0]");
    const double imbalance = allocation.total_demand() - allocation.total_supply();
    if (!(std::abs(imbalance) <= clear_tol)) {
        std::ostringstream msg;
        msg << "allocation does not clear: sum d - sum s = " << imbalance;
        throw DomainError(msg.str());
    }
    return social_welfare(config, allocation.d, allocation.s);
}

double rho_c(const MarketConfig& config) {
    const double excess = config.zeta() - config.kappa0();
    if (!(excess > 0.0)) throw DomainError("rho_C needs zeta > kappa0");
    const double inelastic = static_cast<double>(config.n_consumers()) * config.d0();
    return 1.0 / (1.0 + std::min(config.kappa0(), inelastic) / excess);
}

BoundsReport bounds_report(const MarketConfig& config, const EquilibriumReport& efficient,
                           const EquilibriumReport& nash, double slack) {
    if (efficient.mode != Mode::efficient || nash.mode != Mode::nash)
        throw PreconditionError("bounds_report needs an efficient and a nash report");
    if (!admits_nash_equilibrium(config))
        throw PivotalSupplierError("welfare bounds need a market without pivotal suppliers", rsi(config));

    const double zeta = config.zeta();
    const double kappa0 = config.kappa0();

    double utility_star = 0.0;
    for (std::size_t i = 0; i < config.n_consumers(); ++i)
        utility_star += utility_value(config.utility(i), config.d0(), efficient.allocation.d[i]);
    double cost_star = 0.0;
    for (std::size_t j = 0; j < config.n_suppliers(); ++j)
        cost_star += cost_value(config.cost(j), efficient.allocation.s[j], kappa0);

    BoundsReport r;
    r.welfare_efficient = efficient.welfare;
    r.welfare_nash = nash.welfare;
    r.welfare_gap = r.welfare_efficient - r.welfare_nash;
    r.bound_general = 0.75 * utility_star - zeta / (zeta - kappa0) * cost_star;
    r.regime = bound_regime(config);
    r.general_holds = r.welfare_nash >= r.bound_general - slack;
    if (r.regime == BoundRegime::ample) {
        r.bound_34_43 = 0.75 * utility_star - 4.0 / 3.0 * cost_star;
        r.ample_holds = r.welfare_nash >= *r.bound_34_43 - slack;
    }
    r.lerner = nash.lerner;
    r.lerner_bound = kappa0 / zeta;
    r.lerner_holds = r.lerner <= r.lerner_bound + slack;
    if (r.welfare_efficient > 0.0) r.rho_s = r.welfare_nash / r.welfare_efficient;
    r.rho_c = rho_c(config);
    return r;
}

std::string_view to_string(SweepAxis axis) {
    return axis == SweepAxis::kappa0 ? "kappa0" : "n_consumers";
}

SweepAxis parse_sweep_axis(std::string_view name) {
    if (name == "kappa0") return SweepAxis::kappa0;
    if (name == "n_consumers") return SweepAxis::n_consumers;
    throw ConfigError("unknown sweep axis '" + std::string(name) + "' (expected kappa0 or n_consumers)");
}

MarketConfig config_at(const MarketConfig& base, SweepAxis axis, double value) {
    if (axis == SweepAxis::kappa0) return base.with_kappa0(value);
    const long m = std::lround(value);
    if (m < 1) throw ConfigError("n_consumers must be >= 1");
    std::vector<UtilitySpec> utilities;
    utilities.reserve(static_cast<std::size_t>(m));
    for (long i = 0; i < m; ++i)
        utilities.push_back(base.utilities()[static_cast<std::size_t>(i) % base.n_consumers()]);
    return MarketConfig(base.d0(), base.kappa0(), std::move(utilities), base.costs());
}

std::vector<double> sweep_values(double from, double to, int steps) {
    if (steps < 1) throw ConfigError("steps must be >= 1");
    if (steps == 1) return {from};
    if (!(from < to)) throw ConfigError("sweep range needs from < to");
    std::vector<double> values(static_cast<std::size_t>(steps));
    for (int k = 0; k < steps; ++k)
        values[static_cast<std::size_t>(k)] = from + (to - from) * k / (steps - 1);
    values.back() = to;
    return values;
}

namespace {

SweepPoint sweep_point(const MarketConfig& base, SweepAxis axis, double value,
                       const SolveSettings& settings) {
    SweepPoint point;
    point.axis_value = value;
    std::optional<MarketConfig> config;
    try {
        config.emplace(config_at(base, axis, value));
    } catch (const ConfigError&) {
        point.status = "infeasible";
        return point;
    }
    point.zeta = config->zeta();
    point.regime = bound_regime(*config);
    if (!admits_nash_equilibrium(*config)) {
        point.status = "pivotal";
        return point;
    }
    try {
        const EquilibriumReport eff = solve(*config, Mode::efficient, settings);
        const EquilibriumReport nash = solve(*config, Mode::nash, settings);
        point.bounds = bounds_report(*config, eff, nash);
    } catch (const std::exception& e) {
        point.status = std::string("error: ") + e.what();
    }
    return point;
}

}  // namespace

SweepResult sweep(const MarketConfig& base, SweepAxis axis, std::span<const double> values,
                  const SolveSettings& settings, unsigned threads) {
    if (values.empty()) throw ConfigError("sweep needs at least one value");
    SweepResult result;
    result.axis = axis;
    result.points.resize(values.size());

    const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(values.size())));
    if (workers == 1) {
        for (std::size_t k = 0; k < values.size(); ++k)
            result.points[k] = sweep_point(base, axis, values[k], settings);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t k = next++; k < values.size(); k = next++)
                    result.points[k] = sweep_point(base, axis, values[k], settings);
            });
    }

    std::stable_sort(result.points.begin(), result.points.end(),
                     [](const SweepPoint& a, const SweepPoint& b) { return a.axis_value < b.axis_value; });
    return result;
}

}  // namespace spmarket
