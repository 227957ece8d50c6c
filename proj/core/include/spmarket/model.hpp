#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

namespace spmarket {

enum class UtilityFamily { log, linear, isoelastic };
enum class CostFamily { quadratic, linear, power };

std::string_view to_string(UtilityFamily family);
std::string_view to_string(CostFamily family);
UtilityFamily parse_utility_family(std::string_view name);
CostFamily parse_cost_family(std::string_view name);

/**
 * Concave consumer utility anchored at the inelastic floor, U(d0) = 0.
 *
 *   log         U(d) = beta * ln(d / d0)
 *   linear      U(d) = beta * (d - d0)
 *   isoelastic  U(d) = beta * (d^(1-gamma) - d0^(1-gamma)) / (1 - gamma),  gamma in (0,1)
 */
struct UtilitySpec {
    UtilityFamily family = UtilityFamily::log;
    double beta = 1.0;
    double gamma = 0.5;  // isoelastic only

    static UtilitySpec log(double beta) { return {UtilityFamily::log, beta, 0.5}; }
    static UtilitySpec linear(double beta) { return {UtilityFamily::linear, beta, 0.5}; }
    static UtilitySpec isoelastic(double beta, double gamma) {
        return {UtilityFamily::isoelastic, beta, gamma};
    }

    /// True when U' is constant (the per-agent response is set-valued at one price).
    bool flat_marginal() const { return family == UtilityFamily::linear; }
};

/**
 * Convex supplier cost with C(0) = 0 (and C(s) = 0 for s <= 0).
 *
 *   quadratic  C(s) = alpha * s^2 / 2
 *   linear     C(s) = alpha * s
 *   power      C(s) = alpha * s^q / q,  q >= 1
 */
struct CostSpec {
    CostFamily family = CostFamily::quadratic;
    double alpha = 1.0;
    double q = 2.0;  // power only

    static CostSpec quadratic(double alpha) { return {CostFamily::quadratic, alpha, 2.0}; }
    static CostSpec linear(double alpha) { return {CostFamily::linear, alpha, 1.0}; }
    static CostSpec power(double alpha, double q) { return {CostFamily::power, alpha, q}; }

    bool flat_marginal() const {
        return family == CostFamily::linear || (family == CostFamily::power && q == 1.0);
    }
};

/**
 * A two-sided market: M consumers with a common inelastic floor d0 and N suppliers with a
 * common capacity kappa0. Construction validates the instance and throws ConfigError when
 * M*d0 >= N*kappa0 or any function spec is malformed.
 */
class MarketConfig {
public:
    MarketConfig(double d0, double kappa0, std::vector<UtilitySpec> utilities,
                 std::vector<CostSpec> costs);

    std::size_t n_consumers() const { return utilities_.size(); }
    std::size_t n_suppliers() const { return costs_.size(); }
    double d0() const { return d0_; }
    double kappa0() const { return kappa0_; }
    const std::vector<UtilitySpec>& utilities() const { return utilities_; }
    const std::vector<CostSpec>& costs() const { return costs_; }
    const UtilitySpec& utility(std::size_t i) const { return utilities_.at(i); }
    const CostSpec& cost(std::size_t i) const { return costs_.at(i); }

    /// Total flexible capacity N*kappa0 - M*d0 (> 0).
    double zeta() const { return zeta_; }
    /// N*kappa0 - (M-1)*d0: the most any single consumer can be allocated.
    double demand_span() const { return zeta_ + d0_; }
    /// (N-1)*kappa0 - M*d0: capacity left to the others once one supplier withdraws.
    /// Nonpositive exactly when a supplier is pivotal for Nash purposes.
    double supply_span() const { return zeta_ - kappa0_; }

    MarketConfig with_kappa0(double kappa0) const;

private:
    double d0_;
    double kappa0_;
    std::vector<UtilitySpec> utilities_;
    std::vector<CostSpec> costs_;
    double zeta_;
};

// Utility family. All throw DomainError for d < d0.
double utility_value(const UtilitySpec& spec, double d0, double d);
double utility_marginal(const UtilitySpec& spec, double d0, double d);
/// Integral of U over [d0, d].
double utility_antiderivative(const UtilitySpec& spec, double d0, double d);

// Cost family. All throw DomainError for s < 0 or s > capacity.
double cost_value(const CostSpec& spec, double s, double capacity = std::numeric_limits<double>::infinity());
double cost_marginal(const CostSpec& spec, double s, double capacity = std::numeric_limits<double>::infinity());
/// Integral of C over [0, s].
double cost_antiderivative(const CostSpec& spec, double s, double capacity = std::numeric_limits<double>::infinity());

/// C extended to the whole real line: zero for s <= 0. Used when evaluating payoffs of offers
/// that would imply negative supply.
double cost_value_extended(const CostSpec& spec, double s);
double cost_marginal_extended(const CostSpec& spec, double s);

// Price-anticipating (Nash) transforms of consumer i's utility and supplier i's cost.
// Utility: defined on [d0, demand_span]. Cost: defined on [0, kappa0]; throws
// PivotalSupplierError when supply_span <= 0.
double modified_utility_value(const MarketConfig& config, std::size_t i, double d);
double modified_utility_marginal(const MarketConfig& config, std::size_t i, double d);
double modified_cost_value(const MarketConfig& config, std::size_t i, double s);
double modified_cost_marginal(const MarketConfig& config, std::size_t i, double s);

/// Sum U_i(d_i) - sum C_i(s_i), no feasibility checks beyond function domains.
double social_welfare(const MarketConfig& config, std::span<const double> d,
                      std::span<const double> s);
/// Sum of the modified utilities minus the modified costs.
double modified_social_welfare(const MarketConfig& config, std::span<const double> d,
                               std::span<const double> s);

}  // namespace spmarket
