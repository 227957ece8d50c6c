#include "spmarket_cli/commands.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include "spmarket/errors.hpp"
#include "spmarket/verify.hpp"
#include "spmarket_cli/output.hpp"
#include "spmarket_cli/scenario.hpp"

namespace spmarket::cli {

namespace {

// Runs a command body and maps the library's exceptions onto exit codes.
template <class F>
int guarded(std::ostream& err, F&& body) {
    try {
        return body();
    } catch (const PivotalSupplierError& e) {
        err << "error: " << e.what() << "\n";
        return kExitPivotal;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitInvalid;
    }
}

std::string fmt(double x, int precision = 4) {
    std::ostringstream s;
    s.precision(precision);
    s << x;
    return s.str();
}

}  // namespace

SolveSettings SettingsOverrides::apply(SolveSettings base) const {
    if (lambda_tol) base.lambda_tol = *lambda_tol;
    if (clear_tol) base.clear_tol = *clear_tol;
    if (inner_tol) base.inner_tol = *inner_tol;
    if (max_iter) base.max_iter = *max_iter;
    base.validate();
    return base;
}

unsigned threads_from_env() {
    const char* raw = std::getenv("SPMARKET_THREADS");
    if (raw == nullptr) return 1;
    char* end = nullptr;
    const long n = std::strtol(raw, &end, 10);
    if (end == raw || *end != '\0' || n < 1) return 1;
    return static_cast<unsigned>(n);
}

int cmd_solve(const SolveArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        if (args.format != "json" && args.format != "table")
            throw ValidationError({"--format: expected json or table for solve"});
        const Scenario scenario = load_scenario(args.scenario);
        const SolveSettings settings = args.overrides.apply(scenario.settings);
        const EquilibriumReport report = solve(scenario.market, args.mode, settings);
        if (args.format == "table")
            write_table(out, scenario.market, report);
        else
            out << dump_json(to_json(scenario.market, report));
        return kExitOk;
    });
}

int cmd_verify(const VerifyArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const Scenario scenario = load_scenario(args.scenario);
        const MarketConfig& market = scenario.market;
        const BidProfile bids = args.bids
                                    ? load_bids(*args.bids, market)
                                    : solve(market, Mode::nash, args.overrides.apply(scenario.settings)).bids;

        ordered_json doc;
        const Allocation allocation = allocation_from_bids(market, bids);
        doc["price"] = allocation.lam;

        bool feasible = true;
        for (double s : allocation.s) feasible = feasible && s >= -1e-9 && s <= market.kappa0() + 1e-9;
        if (admits_nash_equilibrium(market) && feasible) {
            doc["kkt"] = to_json(kkt_residuals(market, Mode::nash, allocation));
        } else {
            doc["kkt"] = nullptr;
            doc["kkt_skipped"] = admits_nash_equilibrium(market) ? "bids imply negative supply"
                                                                  : "market has a pivotal supplier";
        }
        if (!admits_nash_equilibrium(market))
            doc["pivotal_unbounded"] = detect_pivotal_unboundedness(market, bids);

        const BestResponseReport br = verify_best_response(market, bids, args.grid_points, args.tol);
        doc["certified"] = br.certified;
        doc["best_response"] = to_json(br);
        out << dump_json(doc);
        if (!br.certified) {
            err << "not a Nash profile: player " << br.worst_player << " can improve its payoff by "
                << -br.players[br.worst_player].gap << "\n";
            return kExitNotCertified;
        }
        return kExitOk;
    });
}

int cmd_sweep(const SweepArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        if (args.format != "csv" && args.format != "json")
            throw ValidationError({"--format: expected csv or json for sweep"});
        if (args.steps < 1) throw ValidationError({"--steps: must be >= 1"});
        if (args.steps > 1 && !(args.from < args.to)) throw ValidationError({"--from must be below --to"});
        const Scenario scenario = load_scenario(args.scenario);
        const SolveSettings settings = args.overrides.apply(scenario.settings);
        const std::vector<double> values = sweep_values(args.from, args.to, args.steps);
        const SweepResult result = sweep(scenario.market, args.axis, values, settings, args.threads);
        if (args.format == "json")
            out << dump_json(to_json(result));
        else
            write_sweep_csv(out, result);
        return kExitOk;
    });
}

MarketConfig reference_market(double kappa0) {
    std::vector<UtilitySpec> utilities;
    for (double beta : {1.0, 1.0, 1.5, 2.0, 2.0}) utilities.push_back(UtilitySpec::log(beta));
    std::vector<CostSpec> costs;
    for (double alpha : {0.1, 0.2, 0.3, 0.4, 0.5, 0.5}) costs.push_back(CostSpec::quadratic(alpha));
    return MarketConfig(1.0, kappa0, std::move(utilities), std::move(costs));
}

ReproOutcome run_reference_repro(unsigned threads) {
    ReproOutcome outcome;
    const MarketConfig base = reference_market(1.1);
    std::vector<double> kappas;
    for (int k = 0; k < 30; ++k) kappas.push_back(1.1 + 0.1 * k);
    outcome.kappa0_sweep = sweep(base, SweepAxis::kappa0, kappas, {}, threads);

    std::vector<double> counts;
    for (int m = 1; m <= 9; ++m) counts.push_back(m);
    outcome.consumer_sweep = sweep(base.with_kappa0(2.0), SweepAxis::n_consumers, counts, {}, threads);

    auto& checks = outcome.checks;
    bool all_solved = true;
    for (const auto* result : {&outcome.kappa0_sweep, &outcome.consumer_sweep})
        for (const SweepPoint& p : result->points) all_solved = all_solved && p.bounds.has_value();
    checks.push_back({"every sweep point solves", all_solved, ""});

    const SweepPoint& first = outcome.kappa0_sweep.points.front();
    if (first.bounds && first.bounds->rho_s) {
        const double r = *first.bounds->rho_s;
        checks.push_back({"rho_S at zeta = 1.6 lies in [0.35, 0.45]", r >= 0.35 && r <= 0.45,
                          "rho_S = " + fmt(r) + ", rho_C = " + fmt(first.bounds->rho_c)});
    } else {
        checks.push_back({"rho_S at zeta = 1.6 lies in [0.35, 0.45]", false, "no value"});
    }

    auto min_rho = [&](BoundRegime from) {
        double lowest = INFINITY;
        std::string where;
        for (const SweepPoint& p : outcome.kappa0_sweep.points) {
            if (!p.bounds || !p.bounds->rho_s || p.regime < from) continue;
            if (*p.bounds->rho_s < lowest) {
                lowest = *p.bounds->rho_s;
                where = "kappa0 = " + fmt(p.axis_value) + ", zeta = " + fmt(p.zeta);
            }
        }
        return std::pair{lowest, where};
    };
    const auto [min_moderate, at_moderate] = min_rho(BoundRegime::moderate);
    checks.push_back({"rho_S >= 0.78 wherever zeta >= 2 kappa0", min_moderate >= 0.78,
                      "min rho_S = " + fmt(min_moderate) + " at " + at_moderate});
    const auto [min_ample, at_ample] = min_rho(BoundRegime::ample);
    checks.push_back({"rho_S >= 0.88 wherever zeta >= 4 kappa0", min_ample >= 0.88,
                      "min rho_S = " + fmt(min_ample) + " at " + at_ample});

    bool above_c = true, lerner_ok = true, dominance = true, bounds_ok = true;
    for (const SweepPoint& p : outcome.kappa0_sweep.points) {
        if (!p.bounds) continue;
        const BoundsReport& b = *p.bounds;
        if (p.regime != BoundRegime::subcritical && b.rho_s && *b.rho_s < b.rho_c) above_c = false;
    }
    for (const auto* result : {&outcome.kappa0_sweep, &outcome.consumer_sweep})
        for (const SweepPoint& p : result->points) {
            if (!p.bounds) continue;
            lerner_ok = lerner_ok && p.bounds->lerner_holds;
            dominance = dominance && p.bounds->welfare_nash <= p.bounds->welfare_efficient + 1e-9;
            bounds_ok = bounds_ok && p.bounds->general_holds && p.bounds->ample_holds;
        }
    checks.push_back({"rho_S >= rho_C wherever zeta >= 2 kappa0", above_c, ""});
    checks.push_back({"Lerner index <= kappa0 / zeta at every point", lerner_ok, ""});
    checks.push_back({"Nash welfare <= efficient welfare at every point", dominance, ""});
    checks.push_back({"welfare lower bounds hold at every point", bounds_ok, ""});

    bool widening = true;
    double previous = -INFINITY;
    for (const SweepPoint& p : outcome.consumer_sweep.points) {
        if (!p.bounds) continue;
        if (p.bounds->welfare_gap < previous - 1e-12) widening = false;
        previous = p.bounds->welfare_gap;
    }
    checks.push_back({"welfare gap widens as consumers are added at fixed capacity", widening, ""});
    return outcome;
}

int cmd_repro(const ReproArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const ReproOutcome outcome = run_reference_repro(args.threads);
        if (args.out_dir) {
            std::filesystem::create_directories(*args.out_dir);
            auto write = [&](const char* name, const SweepResult& result) {
                const auto path = *args.out_dir / name;
                std::ofstream file(path);
                if (!file) throw IoError("cannot write '" + path.string() + "'");
                write_sweep_csv(file, result);
            };
            write("kappa0_sweep.csv", outcome.kappa0_sweep);
            write("consumer_sweep.csv", outcome.consumer_sweep);
        } else {
            out << "# kappa0 sweep\n";
            write_sweep_csv(out, outcome.kappa0_sweep);
            out << "\n# n_consumers sweep (kappa0 = 2)\n";
            write_sweep_csv(out, outcome.consumer_sweep);
            out << "\n";
        }
        std::size_t passed = 0;
        for (const ReproCheck& c : outcome.checks) {
            out << (c.passed ? "PASS " : "FAIL ") << c.name;
            if (!c.detail.empty()) out << " (" << c.detail << ")";
            out << "\n";
            passed += c.passed ? 1 : 0;
        }
        out << passed << "/" << outcome.checks.size() << " checks passed\n";
        return kExitOk;
    });
}

int cmd_curve(const CurveArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        if (args.side != "demand" && args.side != "supply")
            throw ValidationError({"--side: expected demand or supply"});
        if (!(args.p_min > 0.0) || !(args.p_min < args.p_max))
            throw ValidationError({"--pmin/--pmax: need 0 < pmin < pmax"});
        if (args.points < 2) throw ValidationError({"--points: must be >= 2"});
        if (!(args.theta >= 0.0)) throw ValidationError({"--theta: must be >= 0"});
        const bool demand = args.side == "demand";
        out << "price," << (demand ? "demand" : "supply") << "\n";
        for (int k = 0; k < args.points; ++k) {
            const double p = args.p_min + (args.p_max - args.p_min) * k / (args.points - 1);
            const double q = demand ? demand_bid(args.theta, p, args.floor_or_capacity)
                                    : supply_offer(args.theta, p, args.floor_or_capacity);
            out << format_number(p) << "," << format_number(q) << "\n";
        }
        return kExitOk;
    });
}

}  // namespace spmarket::cli
