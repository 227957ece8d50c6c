#include "spmarket/model.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "spmarket/errors.hpp"
#include "spmarket/mechanism.hpp"

namespace spmarket {

namespace {

void check_demand_domain(const UtilitySpec& spec, double d0, double d) {
    if (!(d >= d0)) {
        std::ostringstream msg;
        msg << "utility evaluated below the inelastic floor: d = " << d << " < d0 = " << d0;
        throw DomainError(msg.str());
    }
    if (spec.family != UtilityFamily::linear && !(d0 > 0.0))
        throw DomainError("log and isoelastic utilities require d0 > 0");
}

void check_supply_domain(double s, double capacity) {
    if (!(s >= 0.0) || s > capacity) {
        std::ostringstream msg;
        msg << "cost evaluated outside [0, " << capacity << "]: s = " << s;
        throw DomainError(msg.str());
    }
}

void check_utility_spec(const UtilitySpec& u, std::size_t i) {
    const std::string where = "utilities[" + std::to_string(i) + "]";
    if (!(u.beta > 0.0) || !std::isfinite(u.beta))
        throw ConfigError(where + ".beta must be positive");
    if (u.family == UtilityFamily::isoelastic && !(u.gamma > 0.0 && u.gamma < 1.0))
        throw ConfigError(where + ".gamma must lie in (0, 1)");
}

void check_cost_spec(const CostSpec& c, std::size_t i) {
    const std::string where = "costs[" + std::to_string(i) + "]";
    if (!(c.alpha > 0.0) || !std::isfinite(c.alpha))
        throw ConfigError(where + ".alpha must be positive");
    if (c.family == CostFamily::power && !(c.q >= 1.0 && std::isfinite(c.q)))
        throw ConfigError(where + ".q must be >= 1");
}

// C(s) = alpha * s^q / q for every family; quadratic and linear are q = 2 and q = 1.
double cost_exponent(const CostSpec& spec) {
    switch (spec.family) {
        case CostFamily::quadratic: return 2.0;
        case CostFamily::linear: return 1.0;
        case CostFamily::power: return spec.q;
    }
    return spec.q;
}

}  // namespace

std::string_view to_string(UtilityFamily family) {
    switch (family) {
        case UtilityFamily::log: return "log";
        case UtilityFamily::linear: return "linear";
        case UtilityFamily::isoelastic: return "isoelastic";
    }
    return "unknown";
}

std::string_view to_string(CostFamily family) {
    switch (family) {
        case CostFamily::quadratic: return "quadratic";
        case CostFamily::linear: return "linear";
        case CostFamily::power: return "power";
    }
    return "unknown";
}

UtilityFamily parse_utility_family(std::string_view name) {
    if (name == "log") return UtilityFamily::log;
    if (name == "linear") return UtilityFamily::linear;
    if (name == "isoelastic") return UtilityFamily::isoelastic;
    throw ConfigError("unknown utility family '" + std::string(name) + "'");
}

CostFamily parse_cost_family(std::string_view name) {
    if (name == "quadratic") return CostFamily::quadratic;
    if (name == "linear") return CostFamily::linear;
    if (name == "power") return CostFamily::power;
    throw ConfigError("unknown cost family '" + std::string(name) + "'");
}

MarketConfig::MarketConfig(double d0, double kappa0, std::vector<UtilitySpec> utilities,
                           std::vector<CostSpec> costs)
    : d0_(d0), kappa0_(kappa0), utilities_(std::move(utilities)), costs_(std::move(costs)) {
    if (utilities_.empty()) throw ConfigError("a market needs at least one consumer");
    if (costs_.empty()) throw ConfigError("a market needs at least one supplier");
    if (!(d0_ >= 0.0) || !std::isfinite(d0_)) throw ConfigError("d0 must be finite and >= 0");
    if (!(kappa0_ > 0.0) || !std::isfinite(kappa0_))
        throw ConfigError("kappa0 must be finite and > 0");

    for (std::size_t i = 0; i < utilities_.size(); ++i) {
        check_utility_spec(utilities_[i], i);
        if (d0_ == 0.0 && utilities_[i].family != UtilityFamily::linear)
            throw ConfigError("d0 = 0 is only allowed with linear utilities");
    }
    for (std::size_t i = 0; i < costs_.size(); ++i) check_cost_spec(costs_[i], i);

    const double M = static_cast<double>(utilities_.size());
    const double N = static_cast<double>(costs_.size());
    zeta_ = N * kappa0_ - M * d0_;
    if (!(zeta_ > 0.0)) {
        std::ostringstream msg;
        msg << "total inelastic demand M*d0 = " << M * d0_
            << " must be below total capacity N*kappa0 = " << N * kappa0_;
        throw ConfigError(msg.str());
    }
}

MarketConfig MarketConfig::with_kappa0(double kappa0) const {
    return MarketConfig(d0_, kappa0, utilities_, costs_);
}

double utility_value(const UtilitySpec& spec, double d0, double d) {
    check_demand_domain(spec, d0, d);
    switch (spec.family) {
        case UtilityFamily::log: return spec.beta * std::log(d / d0);
        case UtilityFamily::linear: return spec.beta * (d - d0);
        case UtilityFamily::isoelastic: {
            const double e = 1.0 - spec.gamma;
            return spec.beta * (std::pow(d, e) - std::pow(d0, e)) / e;
        }
    }
    return 0.0;
}

double utility_marginal(const UtilitySpec& spec, double d0, double d) {
    check_demand_domain(spec, d0, d);
    switch (spec.family) {
        case UtilityFamily::log: return spec.beta / d;
        case UtilityFamily::linear: return spec.beta;
        case UtilityFamily::isoelastic: return spec.beta * std::pow(d, -spec.gamma);
    }
    return 0.0;
}

double utility_antiderivative(const UtilitySpec& spec, double d0, double d) {
    check_demand_domain(spec, d0, d);
    if (d == d0) return 0.0;
    switch (spec.family) {
        case UtilityFamily::log:
            // z ln(z/d0) - z evaluated between d0 and d
            return spec.beta * (d * std::log(d / d0) - (d - d0));
        case UtilityFamily::linear: {
            const double x = d - d0;
            return 0.5 * spec.beta * x * x;
        }
        case UtilityFamily::isoelastic: {
            const double e = 1.0 - spec.gamma;
            const double power_part = (std::pow(d, e + 1.0) - std::pow(d0, e + 1.0)) / (e + 1.0);
            return spec.beta / e * (power_part - std::pow(d0, e) * (d - d0));
        }
    }
    return 0.0;
}

double cost_value(const CostSpec& spec, double s, double capacity) {
    check_supply_domain(s, capacity);
    const double q = cost_exponent(spec);
    if (spec.family == CostFamily::quadratic) return 0.5 * spec.alpha * s * s;
    if (spec.family == CostFamily::linear) return spec.alpha * s;
    return spec.alpha * std::pow(s, q) / q;
}

double cost_marginal(const CostSpec& spec, double s, double capacity) {
    check_supply_domain(s, capacity);
    const double q = cost_exponent(spec);
    if (spec.family == CostFamily::quadratic) return spec.alpha * s;
    if (spec.family == CostFamily::linear || q == 1.0) return spec.alpha;
    return spec.alpha * std::pow(s, q - 1.0);
}

double cost_antiderivative(const CostSpec& spec, double s, double capacity) {
    check_supply_domain(s, capacity);
    const double q = cost_exponent(spec);
    if (spec.family == CostFamily::quadratic) return spec.alpha * s * s * s / 6.0;
    if (spec.family == CostFamily::linear) return 0.5 * spec.alpha * s * s;
    return spec.alpha * std::pow(s, q + 1.0) / (q * (q + 1.0));
}

double cost_value_extended(const CostSpec& spec, double s) {
    return s <= 0.0 ? 0.0 : cost_value(spec, s);
}

double cost_marginal_extended(const CostSpec& spec, double s) {
    return s < 0.0 ? 0.0 : cost_marginal(spec, s);
}

namespace {

void check_modified_demand(const MarketConfig& config, double d) {
    if (d > config.demand_span()) {
        std::ostringstream msg;
        msg << "modified utility evaluated above N*kappa0 - (M-1)*d0 = " << config.demand_span()
            << ": d = " << d;
        throw DomainError(msg.str());
    }
}

double checked_supply_span(const MarketConfig& config) {
    const double span = config.supply_span();
    if (!(span > 0.0)) {
        throw PivotalSupplierError("modified cost undefined: (N-1)*kappa0 - M*d0 <= 0",
                                   rsi(config));
    }
    return span;
}

}  // namespace

double modified_utility_value(const MarketConfig& config, std::size_t i, double d) {
    const UtilitySpec& u = config.utility(i);
    const double d0 = config.d0();
    const double U = utility_value(u, d0, d);
    check_modified_demand(config, d);
    const double span = config.demand_span();
    return (1.0 - d / span) * U + utility_antiderivative(u, d0, d) / span;
}

double modified_utility_marginal(const MarketConfig& config, std::size_t i, double d) {
    const double m = utility_marginal(config.utility(i), config.d0(), d);
    check_modified_demand(config, d);
    return (1.0 - d / config.demand_span()) * m;
}

double modified_cost_value(const MarketConfig& config, std::size_t i, double s) {
    const double span = checked_supply_span(config);
    const CostSpec& c = config.cost(i);
    const double k = config.kappa0();
    return (1.0 + s / span) * cost_value(c, s, k) - cost_antiderivative(c, s, k) / span;
}

double modified_cost_marginal(const MarketConfig& config, std::size_t i, double s) {
    const double span = checked_supply_span(config);
    return (1.0 + s / span) * cost_marginal(config.cost(i), s, config.kappa0());
}

double social_welfare(const MarketConfig& config, std::span<const double> d,
                      std::span<const double> s) {
    double total = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) total += utility_value(config.utility(i), config.d0(), d[i]);
    for (std::size_t i = 0; i < s.size(); ++i) total -= cost_value(config.cost(i), s[i], config.kappa0());
    return total;
}

double modified_social_welfare(const MarketConfig& config, std::span<const double> d,
                               std::span<const double> s) {
    double total = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) total += modified_utility_value(config, i, d[i]);
    for (std::size_t i = 0; i < s.size(); ++i) total -= modified_cost_value(config, i, s[i]);
    return total;
}

}  // namespace spmarket
