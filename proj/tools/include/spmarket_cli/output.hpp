#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "spmarket/analysis.hpp"
#include "spmarket/solver.hpp"
#include "spmarket/verify.hpp"

namespace spmarket::cli {

using ordered_json = nlohmann::ordered_json;

/// Formats a double with 17 significant digits ("%.17g"); non-finite values become "null".
std::string format_number(double x);

/// Serializes with insertion-ordered keys, two-space indent and 17-significant-digit floats,
/// so identical inputs produce byte-identical output.
std::string dump_json(const ordered_json& doc);

ordered_json to_json(const MarketConfig& config, const EquilibriumReport& report);
ordered_json to_json(const KktReport& report);
ordered_json to_json(const BestResponseReport& report);
ordered_json to_json(const BoundsReport& report);
ordered_json to_json(const SweepResult& result);

/// Human-readable solve summary.
void write_table(std::ostream& out, const MarketConfig& config, const EquilibriumReport& report);

/**
 * Sweep CSV. Columns: axis, zeta, welfare_eff, welfare_nash, rho_s, rho_c, lerner,
 * lerner_bound, status. Undefined values are left empty. A '#' comment row is emitted where
 * zeta crosses 2*kappa0 or 4*kappa0.
 */
void write_sweep_csv(std::ostream& out, const SweepResult& result);

}  // namespace spmarket::cli
