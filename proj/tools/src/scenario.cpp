#include "spmarket_cli/scenario.hpp"

#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include "spmarket/errors.hpp"

namespace spmarket::cli {

using nlohmann::json;

namespace {

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& s : items) out += "\n  " + s;
    return out;
}

// Collects every problem before failing so a user sees all bad fields at once.
class Checker {
public:
    void fail(std::string msg) { problems_.push_back(std::move(msg)); }

    void reject_unknown(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
        for (const auto& [key, _] : obj.items())
            if (!allowed.contains(key)) fail(where + "." + key + ": unknown key");
    }

    std::optional<double> number(const json& obj, const std::string& where, const std::string& key,
                                 bool required = true) {
        if (!obj.contains(key)) {
            if (required) fail(where + "." + key + ": missing");
            return std::nullopt;
        }
        const json& v = obj.at(key);
        if (!v.is_number()) {
            fail(where + "." + key + ": expected a number");
            return std::nullopt;
        }
        return v.get<double>();
    }

    std::optional<long long> integer(const json& obj, const std::string& where, const std::string& key,
                                     bool required = true) {
        if (!obj.contains(key)) {
            if (required) fail(where + "." + key + ": missing");
            return std::nullopt;
        }
        const json& v = obj.at(key);
        if (!v.is_number_integer()) {
            fail(where + "." + key + ": expected an integer");
            return std::nullopt;
        }
        return v.get<long long>();
    }

    const std::vector<std::string>& problems() const { return problems_; }

    void throw_if_failed() const {
        if (!problems_.empty()) throw ValidationError(problems_);
    }

private:
    std::vector<std::string> problems_;
};

std::optional<UtilitySpec> parse_utility(Checker& check, const json& u, const std::string& where) {
    if (!u.is_object()) {
        check.fail(where + ": expected an object");
        return std::nullopt;
    }
    check.reject_unknown(u, where, {"family", "beta", "gamma"});
    if (!u.contains("family") || !u["family"].is_string()) {
        check.fail(where + ".family: missing or not a string");
        return std::nullopt;
    }
    UtilitySpec spec;
    try {
        spec.family = parse_utility_family(u["family"].get<std::string>());
    } catch (const ConfigError& e) {
        check.fail(where + ".family: " + e.what());
        return std::nullopt;
    }
    const auto beta = check.number(u, where, "beta");
    const bool iso = spec.family == UtilityFamily::isoelastic;
    const auto gamma = check.number(u, where, "gamma", iso);
    if (!iso && u.contains("gamma")) check.fail(where + ".gamma: only valid for isoelastic utilities");
    if (!beta || (iso && !gamma)) return std::nullopt;
    spec.beta = *beta;
    if (gamma) spec.gamma = *gamma;
    return spec;
}

std::optional<CostSpec> parse_cost(Checker& check, const json& c, const std::string& where) {
    if (!c.is_object()) {
        check.fail(where + ": expected an object");
        return std::nullopt;
    }
    check.reject_unknown(c, where, {"family", "alpha", "q"});
    if (!c.contains("family") || !c["family"].is_string()) {
        check.fail(where + ".family: missing or not a string");
        return std::nullopt;
    }
    CostSpec spec;
    try {
        spec.family = parse_cost_family(c["family"].get<std::string>());
    } catch (const ConfigError& e) {
        check.fail(where + ".family: " + e.what());
        return std::nullopt;
    }
    const auto alpha = check.number(c, where, "alpha");
    const bool power = spec.family == CostFamily::power;
    const auto q = check.number(c, where, "q", power);
    if (!power && c.contains("q")) check.fail(where + ".q: only valid for power costs");
    if (!alpha || (power && !q)) return std::nullopt;
    spec.alpha = *alpha;
    spec.q = power ? *q : (spec.family == CostFamily::linear ? 1.0 : 2.0);
    return spec;
}

SolveSettings parse_settings(Checker& check, const json& s) {
    SolveSettings out;
    if (!s.is_object()) {
        check.fail("settings: expected an object");
        return out;
    }
    check.reject_unknown(s, "settings", {"lambda_tol", "clear_tol", "inner_tol", "max_iter"});
    if (auto v = check.number(s, "settings", "lambda_tol", false)) out.lambda_tol = *v;
    if (auto v = check.number(s, "settings", "clear_tol", false)) out.clear_tol = *v;
    if (auto v = check.number(s, "settings", "inner_tol", false)) out.inner_tol = *v;
    if (auto v = check.integer(s, "settings", "max_iter", false)) out.max_iter = static_cast<int>(*v);
    try {
        out.validate();
    } catch (const ConfigError& e) {
        check.fail(std::string("settings: ") + e.what());
    }
    return out;
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> problems)
    : std::runtime_error("invalid input:" + join(problems)), problems_(std::move(problems)) {}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw IoError("cannot parse '" + path.string() + "': " + e.what());
    }
}

Scenario parse_scenario(const json& doc) {
    Checker check;
    if (!doc.is_object()) throw ValidationError({"scenario: expected a JSON object"});
    check.reject_unknown(doc, "scenario", {"schema_version", "market", "settings"});

    if (auto version = check.integer(doc, "scenario", "schema_version"); version && *version != kSchemaVersion)
        check.fail("scenario.schema_version: expected " + std::to_string(kSchemaVersion) + ", got " +
                   std::to_string(*version));

    SolveSettings settings;
    if (doc.contains("settings")) settings = parse_settings(check, doc["settings"]);

    if (!doc.contains("market") || !doc["market"].is_object()) {
        check.fail("scenario.market: missing or not an object");
        check.throw_if_failed();
    }
    const json& m = doc["market"];
    check.reject_unknown(m, "market", {"n_suppliers", "n_consumers", "d0", "kappa0", "utilities", "costs"});
    const auto n_suppliers = check.integer(m, "market", "n_suppliers");
    const auto n_consumers = check.integer(m, "market", "n_consumers");
    const auto d0 = check.number(m, "market", "d0");
    const auto kappa0 = check.number(m, "market", "kappa0");
    if (n_suppliers && *n_suppliers < 1) check.fail("market.n_suppliers: must be >= 1");
    if (n_consumers && *n_consumers < 1) check.fail("market.n_consumers: must be >= 1");

    std::vector<UtilitySpec> utilities;
    if (!m.contains("utilities") || !m["utilities"].is_array()) {
        check.fail("market.utilities: missing or not an array");
    } else {
        const json& arr = m["utilities"];
        if (n_consumers && static_cast<long long>(arr.size()) != *n_consumers)
            check.fail("market.utilities: length " + std::to_string(arr.size()) +
                       " does not match n_consumers = " + std::to_string(*n_consumers));
        for (std::size_t i = 0; i < arr.size(); ++i)
            if (auto u = parse_utility(check, arr[i], "market.utilities[" + std::to_string(i) + "]"))
                utilities.push_back(*u);
    }
    std::vector<CostSpec> costs;
    if (!m.contains("costs") || !m["costs"].is_array()) {
        check.fail("market.costs: missing or not an array");
    } else {
        const json& arr = m["costs"];
        if (n_suppliers && static_cast<long long>(arr.size()) != *n_suppliers)
            check.fail("market.costs: length " + std::to_string(arr.size()) +
                       " does not match n_suppliers = " + std::to_string(*n_suppliers));
        for (std::size_t i = 0; i < arr.size(); ++i)
            if (auto c = parse_cost(check, arr[i], "market.costs[" + std::to_string(i) + "]"))
                costs.push_back(*c);
    }
    check.throw_if_failed();

    try {
        return Scenario{MarketConfig(*d0, *kappa0, std::move(utilities), std::move(costs)), settings};
    } catch (const ConfigError& e) {
        throw ValidationError({std::string("market: ") + e.what()});
    }
}

Scenario load_scenario(const std::filesystem::path& path) { return parse_scenario(read_json_file(path)); }

json scenario_to_json(const MarketConfig& market, const SolveSettings& settings) {
    json utilities = json::array();
    for (const UtilitySpec& u : market.utilities()) {
        json item = {{"family", std::string(to_string(u.family))}, {"beta", u.beta}};
        if (u.family == UtilityFamily::isoelastic) item["gamma"] = u.gamma;
        utilities.push_back(item);
    }
    json costs = json::array();
    for (const CostSpec& c : market.costs()) {
        json item = {{"family", std::string(to_string(c.family))}, {"alpha", c.alpha}};
        if (c.family == CostFamily::power) item["q"] = c.q;
        costs.push_back(item);
    }
    return json{{"schema_version", kSchemaVersion},
                {"market",
                 {{"n_suppliers", market.n_suppliers()},
                  {"n_consumers", market.n_consumers()},
                  {"d0", market.d0()},
                  {"kappa0", market.kappa0()},
                  {"utilities", utilities},
                  {"costs", costs}}},
                {"settings",
                 {{"lambda_tol", settings.lambda_tol},
                  {"clear_tol", settings.clear_tol},
                  {"inner_tol", settings.inner_tol},
                  {"max_iter", settings.max_iter}}}};
}

BidProfile parse_bids(const json& doc, const MarketConfig& market) {
    const json* src = &doc;
    if (doc.is_object() && doc.contains("bids")) src = &doc["bids"];
    Checker check;
    if (!src->is_object()) throw ValidationError({"bids: expected an object with theta_d and theta_s"});

    BidProfile bids;
    auto read = [&](const char* key, std::vector<double>& out, std::size_t expected) {
        const std::string where = std::string("bids.") + key;
        if (!src->contains(key) || !(*src)[key].is_array()) {
            check.fail(where + ": missing or not an array");
            return;
        }
        const json& arr = (*src)[key];
        if (arr.size() != expected)
            check.fail(where + ": length " + std::to_string(arr.size()) + " does not match " +
                       std::to_string(expected));
        for (std::size_t i = 0; i < arr.size(); ++i) {
            if (!arr[i].is_number()) {
                check.fail(where + "[" + std::to_string(i) + "]: expected a number");
                continue;
            }
            const double t = arr[i].get<double>();
            if (!(t >= 0.0) || !std::isfinite(t))
                check.fail(where + "[" + std::to_string(i) + "]: must be finite and >= 0");
            out.push_back(t);
        }
    };
    read("theta_d", bids.theta_d, market.n_consumers());
    read("theta_s", bids.theta_s, market.n_suppliers());
    check.throw_if_failed();
    if (!(bids.total() > 0.0))
        throw ValidationError({"bids: every parameter is zero, so the clearing price is undefined"});
    return bids;
}

BidProfile load_bids(const std::filesystem::path& path, const MarketConfig& market) {
    return parse_bids(read_json_file(path), market);
}

}  // namespace spmarket::cli
