#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "spmarket/mechanism.hpp"
#include "spmarket/model.hpp"
#include "spmarket/solver.hpp"

namespace spmarket::cli {

inline constexpr int kSchemaVersion = 1;

/// Scenario or bids document that failed validation. `problems` lists every offending field.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(std::vector<std::string> problems);
    const std::vector<std::string>& problems() const { return problems_; }

private:
    std::vector<std::string> problems_;
};

/// Could not read or parse a file.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/**
 * Scenario document, schema_version 1:
 *
 *   {
 *     "schema_version": 1,
 *     "market": {
 *       "n_suppliers": 2, "n_consumers": 1, "d0": 1.0, "kappa0": 2.0,
 *       "utilities": [{"family": "linear", "beta": 1.0}],
 *       "costs": [{"family": "quadratic", "alpha": 1.0}, {"family": "power", "alpha": 1.0, "q": 3}]
 *     },
 *     "settings": {"lambda_tol": 1e-12, "clear_tol": 1e-9, "inner_tol": 1e-13, "max_iter": 200}
 *   }
 *
 * `gamma` is required for isoelastic utilities and `q` for power costs; both are rejected on
 * other families. `settings` and each of its keys are optional. Unknown keys are rejected.
 */
struct Scenario {
    MarketConfig market;
    SolveSettings settings;
};

Scenario parse_scenario(const nlohmann::json& doc);
Scenario load_scenario(const std::filesystem::path& path);

nlohmann::json scenario_to_json(const MarketConfig& market, const SolveSettings& settings = {});

/// Accepts {"theta_d": [...], "theta_s": [...]} or any document with such an object under
/// "bids" (e.g. the output of `spmarket solve`).
BidProfile parse_bids(const nlohmann::json& doc, const MarketConfig& market);
BidProfile load_bids(const std::filesystem::path& path, const MarketConfig& market);

nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace spmarket::cli
