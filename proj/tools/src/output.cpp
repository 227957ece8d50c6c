#include "spmarket_cli/output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace spmarket::cli {

std::string format_number(double x) {
    if (!std::isfinite(x)) return "null";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

void dump(std::string& out, const ordered_json& v, int depth) {
    const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
    const std::string close_pad(static_cast<std::size_t>(2 * depth), ' ');
    switch (v.type()) {
        case ordered_json::value_t::object: {
            if (v.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (const auto& [key, item] : v.items()) {
                if (!first) out += ",\n";
                first = false;
                out += pad + ordered_json(key).dump() + ": ";
                dump(out, item, depth + 1);
            }
            out += "\n" + close_pad + "}";
            return;
        }
        case ordered_json::value_t::array: {
            if (v.empty()) {
                out += "[]";
                return;
            }
            // numeric arrays stay on one line
            const bool flat = std::all_of(v.begin(), v.end(), [](const auto& e) { return e.is_primitive(); });
            out += flat ? "[" : "[\n";
            bool first = true;
            for (const auto& item : v) {
                if (!first) out += flat ? ", " : ",\n";
                first = false;
                if (!flat) out += pad;
                dump(out, item, depth + 1);
            }
            out += flat ? "]" : "\n" + close_pad + "]";
            return;
        }
        case ordered_json::value_t::number_float:
            out += format_number(v.get<double>());
            return;
        default:
            out += v.dump();
            return;
    }
}

ordered_json optional_number(const std::optional<double>& x) {
    return x ? ordered_json(*x) : ordered_json(nullptr);
}

ordered_json bids_json(const BidProfile& bids) {
    return ordered_json{{"theta_d", bids.theta_d}, {"theta_s", bids.theta_s}};
}

}  // namespace

std::string dump_json(const ordered_json& doc) {
    std::string out;
    dump(out, doc, 0);
    out += "\n";
    return out;
}

ordered_json to_json(const MarketConfig& config, const EquilibriumReport& report) {
    ordered_json j;
    j["mode"] = std::string(to_string(report.mode));
    j["lam"] = report.allocation.lam;
    j["d"] = report.allocation.d;
    j["s"] = report.allocation.s;
    j["bids"] = bids_json(report.bids);
    j["welfare"] = report.welfare;
    j["modified_welfare"] = optional_number(report.modified_welfare);
    j["lerner"] = report.lerner;
    j["lerner_bound"] = config.kappa0() / config.zeta();
    j["kkt_residual"] = report.kkt_residual;
    j["iterations"] = report.iterations;
    j["zeta"] = config.zeta();
    j["rsi"] = rsi(config);
    return j;
}

ordered_json to_json(const KktReport& report) {
    ordered_json branches = ordered_json::array();
    for (Branch b : report.branches) branches.push_back(std::string(to_string(b)));
    ordered_json j;
    j["residuals"] = report.residuals;
    j["branches"] = branches;
    j["worst_agent"] = report.worst_agent;
    j["worst_residual"] = report.worst_residual;
    j["clearing_residual"] = report.clearing_residual;
    return j;
}

ordered_json to_json(const BestResponseReport& report) {
    ordered_json players = ordered_json::array();
    for (const PlayerScan& p : report.players)
        players.push_back(ordered_json{{"candidate_payoff", p.candidate_payoff},
                                       {"best_payoff", p.best_payoff},
                                       {"best_theta", p.best_theta},
                                       {"upper", p.upper},
                                       {"gap", p.gap},
                                       {"best_at_cap", p.best_at_cap}});
    ordered_json j;
    j["certified"] = report.certified;
    j["tol"] = report.tol;
    j["grid_points"] = report.grid_points;
    j["worst_player"] = report.worst_player;
    j["gaps"] = report.gaps();
    j["theta_max"] = report.theta_max;
    j["players"] = players;
    return j;
}

ordered_json to_json(const BoundsReport& r) {
    ordered_json j;
    j["welfare_efficient"] = r.welfare_efficient;
    j["welfare_nash"] = r.welfare_nash;
    j["welfare_gap"] = r.welfare_gap;
    j["bound_general"] = r.bound_general;
    j["regime"] = std::string(to_string(r.regime));
    j["bound_34_43"] = optional_number(r.bound_34_43);
    j["lerner"] = r.lerner;
    j["lerner_bound"] = r.lerner_bound;
    j["rho_s"] = optional_number(r.rho_s);
    j["rho_c"] = r.rho_c;
    j["general_holds"] = r.general_holds;
    j["ample_holds"] = r.ample_holds;
    j["lerner_holds"] = r.lerner_holds;
    return j;
}

ordered_json to_json(const SweepResult& result) {
    ordered_json points = ordered_json::array();
    for (const SweepPoint& p : result.points) {
        ordered_json j;
        j["axis_value"] = p.axis_value;
        j["status"] = p.status;
        j["zeta"] = p.zeta;
        j["regime"] = std::string(to_string(p.regime));
        j["bounds"] = p.bounds ? to_json(*p.bounds) : ordered_json(nullptr);
        points.push_back(j);
    }
    return ordered_json{{"axis", std::string(to_string(result.axis))}, {"points", points}};
}

void write_table(std::ostream& out, const MarketConfig& config, const EquilibriumReport& report) {
    out << "mode          " << to_string(report.mode) << "\n"
        << "price (lam)   " << format_number(report.allocation.lam) << "\n"
        << "zeta          " << format_number(config.zeta()) << "\n"
        << "RSI           " << format_number(rsi(config)) << "\n"
        << "welfare       " << format_number(report.welfare) << "\n";
    if (report.modified_welfare) out << "mod. welfare  " << format_number(*report.modified_welfare) << "\n";
    out << "Lerner index  " << format_number(report.lerner) << "  (bound "
        << format_number(config.kappa0() / config.zeta()) << ")\n"
        << "KKT residual  " << format_number(report.kkt_residual) << "\n"
        << "iterations    " << report.iterations << "\n\n";
    out << std::left << std::setw(12) << "agent" << std::setw(26) << "quantity" << "theta\n";
    for (std::size_t i = 0; i < report.allocation.d.size(); ++i)
        out << std::setw(12) << ("consumer " + std::to_string(i)) << std::setw(26)
            << format_number(report.allocation.d[i]) << format_number(report.bids.theta_d[i]) << "\n";
    for (std::size_t j = 0; j < report.allocation.s.size(); ++j)
        out << std::setw(12) << ("supplier " + std::to_string(j)) << std::setw(26)
            << format_number(report.allocation.s[j]) << format_number(report.bids.theta_s[j]) << "\n";
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
    auto cell = [](const std::optional<double>& x) { return x ? format_number(*x) : std::string(); };
    out << "axis,zeta,welfare_eff,welfare_nash,rho_s,rho_c,lerner,lerner_bound,status\n";
    std::optional<BoundRegime> previous;
    for (const SweepPoint& p : result.points) {
        if (p.status != "infeasible") {
            if (previous && p.regime != *previous) {
                if (p.regime == BoundRegime::moderate)
                    out << "# zeta >= 2*kappa0 from here (moderate regime)\n";
                else if (p.regime == BoundRegime::ample)
                    out << "# zeta >= 4*kappa0 from here (ample regime)\n";
                else
                    out << "# zeta < 2*kappa0 from here (subcritical regime)\n";
            }
            previous = p.regime;
        }
        out << format_number(p.axis_value) << ",";
        if (p.bounds) {
            const BoundsReport& b = *p.bounds;
            out << format_number(p.zeta) << "," << format_number(b.welfare_efficient) << ","
                << format_number(b.welfare_nash) << "," << cell(b.rho_s) << "," << format_number(b.rho_c)
                << "," << format_number(b.lerner) << "," << format_number(b.lerner_bound) << ",";
        } else {
            out << (p.status == "infeasible" ? std::string() : format_number(p.zeta)) << ",,,,,,,";
        }
        // statuses with commas are quoted
        if (p.status.find_first_of(",\"") != std::string::npos) {
            std::string quoted;
            for (char c : p.status) quoted += c == '"' ? std::string("\"\"") : std::string(1, c);
            out << '"' << quoted << '"' << "\n";
        } else {
            out << p.status << "\n";
        }
    }
}

}  // namespace spmarket::cli
