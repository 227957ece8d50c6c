#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spmarket/mechanism.hpp"
#include "spmarket/model.hpp"
#include "spmarket/solver.hpp"

namespace spmarket {

/// Position of zeta relative to kappa0: (kappa0, 2 kappa0), [2 kappa0, 4 kappa0), [4 kappa0, inf).
enum class BoundRegime { subcritical, moderate, ample };

std::string_view to_string(BoundRegime regime);
BoundRegime bound_regime(const MarketConfig& config);

struct BoundsReport {
    double welfare_nash = 0.0;
    double welfare_efficient = 0.0;
    /// 3/4 sum U(d*) - (1 - kappa0/zeta)^-1 sum C(s*)
    double bound_general = 0.0;
    BoundRegime regime = BoundRegime::subcritical;
    /// 3/4 sum U(d*) - 4/3 sum C(s*); only when zeta >= 4 kappa0
    std::optional<double> bound_34_43;
    double lerner = 0.0;
    double lerner_bound = 0.0;  ///< kappa0 / zeta
    /// welfare_nash / welfare_efficient; absent when welfare_efficient <= 0
    std::optional<double> rho_s;
    double rho_c = 0.0;
    double welfare_gap = 0.0;   ///< welfare_efficient - welfare_nash

    bool general_holds = false;
    bool ample_holds = true;    ///< vacuously true outside the ample regime
    bool lerner_holds = false;
    bool all_hold() const { return general_holds && ample_holds && lerner_holds; }
};

/// True social welfare of a feasible allocation. Throws DomainError when the allocation
/// violates the box constraints or does not clear to `clear_tol`.
double welfare(const MarketConfig& config, const Allocation& allocation, double clear_tol = 1e-9);

/// (1 + min(kappa0, M d0) / (zeta - kappa0))^-1. Throws DomainError when zeta <= kappa0.
double rho_c(const MarketConfig& config);

/// Evaluates the welfare and markup bounds for a pair of solves on the same market.
/// `slack` is the absolute tolerance used for the inequality flags.
BoundsReport bounds_report(const MarketConfig& config, const EquilibriumReport& efficient,
                           const EquilibriumReport& nash, double slack = 1e-9);

enum class SweepAxis { kappa0, n_consumers };

std::string_view to_string(SweepAxis axis);
SweepAxis parse_sweep_axis(std::string_view name);

struct SweepPoint {
    double axis_value = 0.0;
    std::string status = "ok";  ///< ok | pivotal | infeasible | error: <message>
    double zeta = 0.0;
    BoundRegime regime = BoundRegime::subcritical;
    std::optional<BoundsReport> bounds;
};

struct SweepResult {
    SweepAxis axis = SweepAxis::kappa0;
    std::vector<SweepPoint> points;
};

/**
 * Market obtained by moving `axis` of `base` to `value`. For n_consumers the value is
 * rounded to an integer and consumer utilities are taken cyclically from `base`.
 */
MarketConfig config_at(const MarketConfig& base, SweepAxis axis, double value);

/// Evenly spaced values from `from` to `to` inclusive; a single point at `from` when steps == 1.
std::vector<double> sweep_values(double from, double to, int steps);

/**
 * Solves both modes at each axis value. Per-point failures are recorded in the point's
 * status. Points run on up to `threads` worker threads; output order follows `values`.
 */
SweepResult sweep(const MarketConfig& base, SweepAxis axis, std::span<const double> values,
                  const SolveSettings& settings = {}, unsigned threads = 1);

}  // namespace spmarket
