#include <cmath>

#include <gtest/gtest.h>

#include "spmarket/errors.hpp"
#include "spmarket/mechanism.hpp"
#include "spmarket/solver.hpp"
#include "spmarket/verify.hpp"
#include "support/random_market.hpp"

using namespace spmarket;
using spmarket::testing::MarketGen;

namespace {

MarketConfig hand_market() {
    return MarketConfig(1, 2, {UtilitySpec::linear(1)}, {CostSpec::quadratic(1), CostSpec::quadratic(1)});
}

MarketConfig reference_market(double kappa0) {
    return MarketConfig(1.0, kappa0,
                        {UtilitySpec::log(1), UtilitySpec::log(1), UtilitySpec::log(1.5),
                         UtilitySpec::log(2), UtilitySpec::log(2)},
                        {CostSpec::quadratic(0.1), CostSpec::quadratic(0.2), CostSpec::quadratic(0.3),
                         CostSpec::quadratic(0.4), CostSpec::quadratic(0.5), CostSpec::quadratic(0.5)});
}

}  // namespace

TEST(AgentResponse, Demand) {
    const auto m = hand_market();
    EXPECT_EQ(agent_demand_at(m, 0, 1.5, Mode::efficient), 1.0);
    EXPECT_EQ(agent_demand_at(m, 0, 0.5, Mode::efficient), efficient_demand_cap(m));
    EXPECT_DOUBLE_EQ(efficient_demand_cap(m), 1 + 10 * 3.0);
    EXPECT_NEAR(agent_demand_at(m, 0, 0.75, Mode::nash), 1.0, 1e-12);
    // (1 - d/4) = 0.5 at d = 2
    EXPECT_NEAR(agent_demand_at(m, 0, 0.5, Mode::nash), 2.0, 1e-12);
    EXPECT_THROW(agent_demand_at(m, 0, 0.0, Mode::nash), DomainError);
}

TEST(AgentResponse, Supply) {
    const auto m = hand_market();
    const MarketConfig flat(1, 2, {UtilitySpec::linear(1)}, {CostSpec::linear(1), CostSpec::linear(1)});
    EXPECT_EQ(agent_supply_at(flat, 0, 0.5, Mode::efficient), 0.0);
    EXPECT_EQ(agent_supply_at(flat, 0, 0.5, Mode::nash), 0.0);
    EXPECT_EQ(agent_supply_at(m, 0, 5.0, Mode::efficient), 2.0);
    EXPECT_NEAR(agent_supply_at(m, 0, 0.75, Mode::nash), 0.5, 1e-12);
    EXPECT_NEAR(agent_supply_at(m, 1, 0.6, Mode::efficient), 0.6, 1e-12);

    const MarketConfig pivotal(1, 2, {UtilitySpec::log(1)}, {CostSpec::quadratic(1)});
    EXPECT_THROW(agent_supply_at(pivotal, 0, 1.0, Mode::nash), PivotalSupplierError);
    EXPECT_NO_THROW(agent_supply_at(pivotal, 0, 1.0, Mode::efficient));
}

TEST(Solve, HandInstanceEfficient) {
    const auto r = solve(hand_market(), Mode::efficient);
    EXPECT_NEAR(r.allocation.lam, 1.0, 1e-9);
    EXPECT_NEAR(r.allocation.d[0], 2.0, 1e-9);
    EXPECT_NEAR(r.allocation.s[0], 1.0, 1e-9);
    EXPECT_NEAR(r.allocation.s[1], 1.0, 1e-9);
    EXPECT_NEAR(r.welfare, 0.0, 1e-9);
    EXPECT_FALSE(r.modified_welfare.has_value());
}

TEST(Solve, HandInstanceNash) {
    const auto r = solve(hand_market(), Mode::nash);
    EXPECT_NEAR(r.allocation.lam, 0.75, 1e-9);
    EXPECT_NEAR(r.allocation.d[0], 1.0, 1e-9);
    EXPECT_NEAR(r.allocation.s[0], 0.5, 1e-9);
    EXPECT_NEAR(r.allocation.s[1], 0.5, 1e-9);
    EXPECT_NEAR(r.bids.theta_d[0], 0.0, 1e-9);
    EXPECT_NEAR(r.bids.theta_s[0], 1.125, 1e-9);
    EXPECT_NEAR(r.bids.theta_s[1], 1.125, 1e-9);
    EXPECT_NEAR(r.welfare, -0.25, 1e-9);
    EXPECT_NEAR(r.lerner, 1.0 / 3, 1e-9);
    ASSERT_TRUE(r.modified_welfare.has_value());
    EXPECT_LE(r.kkt_residual, 1e-8);
}

TEST(Solve, ReferenceInstanceMatchesIndependentSolve) {
    // Values from a separate bisection on the closed-form log/quadratic first-order conditions.
    const auto r = solve(reference_market(1.1), Mode::nash);
    EXPECT_NEAR(r.allocation.lam, 0.87966, 1e-5);
    EXPECT_NEAR(r.allocation.d[0], 1.0, 1e-6);
    EXPECT_NEAR(r.allocation.d[3], 1.2129, 1e-4);
    EXPECT_NEAR(r.allocation.s[0], 1.1, 1e-6);
    EXPECT_NEAR(r.allocation.s[5], 0.7207, 1e-4);
}

TEST(Solve, SingleSupplierRefusedInNash) {
    const MarketConfig m(1, 3, {UtilitySpec::log(1), UtilitySpec::log(2)}, {CostSpec::quadratic(1)});
    EXPECT_THROW(solve(m, Mode::nash), PivotalSupplierError);
    EXPECT_NO_THROW(solve(m, Mode::efficient));
}

TEST(Solve, IterationLimit) {
    SolveSettings s;
    s.max_iter = 3;
    EXPECT_THROW(solve(reference_market(1.5), Mode::nash, s), IterationLimitError);
}

TEST(Solve, SettingsValidation) {
    SolveSettings s;
    s.lambda_tol = 0;
    EXPECT_THROW(s.validate(), ConfigError);
    s = {};
    s.max_iter = 0;
    EXPECT_THROW(solve(hand_market(), Mode::nash, s), ConfigError);
    EXPECT_EQ(parse_mode("efficient"), Mode::efficient);
    EXPECT_EQ(to_string(Mode::nash), "nash");
    EXPECT_THROW(parse_mode("cournot"), ConfigError);
}

TEST(Solve, BitReproducible) {
    MarketGen gen(31);
    for (int k = 0; k < 20; ++k) {
        const auto m = gen.market();
        const auto a = solve(m, Mode::nash);
        const auto b = solve(m, Mode::nash);
        EXPECT_EQ(a.allocation.lam, b.allocation.lam);
        EXPECT_EQ(a.allocation.d, b.allocation.d);
        EXPECT_EQ(a.allocation.s, b.allocation.s);
    }
}

TEST(NashBids, HandInstance) {
    const auto r = solve(hand_market(), Mode::nash);
    const BidProfile b = nash_bid_profile(r);
    EXPECT_GE(b.positive_count(), 2u);
    EXPECT_THROW(nash_bid_profile(solve(hand_market(), Mode::efficient)), PreconditionError);
}

TEST(NashBids, RecoveredBidsReproducePriceAndAllocation) {
    MarketGen gen(32);
    for (int k = 0; k < 200; ++k) {
        const auto m = gen.market();
        const auto r = solve(m, Mode::nash);
        const BidProfile b = nash_bid_profile(r);
        const double lam = r.allocation.lam;
        EXPECT_NEAR(clearing_price(m, b), lam, 1e-9 * lam);
        EXPECT_GE(b.positive_count(), 2u);
        for (std::size_t i = 0; i < m.n_consumers(); ++i)
            EXPECT_NEAR(demand_bid(b.theta_d[i], lam, m.d0()), r.allocation.d[i], 1e-12 * std::max(1.0, r.allocation.d[i]));
        for (std::size_t j = 0; j < m.n_suppliers(); ++j) {
            EXPECT_NEAR(supply_offer(b.theta_s[j], lam, m.kappa0()), r.allocation.s[j], 1e-12 * std::max(1.0, m.kappa0()));
            EXPECT_EQ(b.theta_s[j] == 0.0, r.allocation.s[j] == m.kappa0());
        }
    }
}

TEST(Excess, NonincreasingInPrice) {
    MarketGen gen(33);
    for (int k = 0; k < 100; ++k) {
        const auto m = gen.market();
        for (Mode mode : {Mode::efficient, Mode::nash}) {
            double prev = INFINITY;
            for (int t = -40; t <= 40; ++t) {
                const double e = excess_demand(m, std::pow(1.25, t), mode);
                EXPECT_LE(e, prev + 1e-12);
                prev = e;
            }
        }
    }
}

TEST(Properties, RandomInstances) {
    MarketGen gen(34);
    for (int k = 0; k < 300; ++k) {
        const auto m = gen.market();
        const auto eff = solve(m, Mode::efficient);
        const auto nash = solve(m, Mode::nash);
        EXPECT_LE(nash.welfare, eff.welfare + 1e-9) << "instance " << k;
        EXPECT_LE(eff.kkt_residual, 1e-8);
        EXPECT_LE(nash.kkt_residual, 1e-8);
        EXPECT_LE(std::abs(nash.allocation.total_demand() - nash.allocation.total_supply()), 1e-9);
        EXPECT_LT(nash.lerner, 1.0);
    }
}

TEST(Properties, UniqueUnderPerturbedBracket) {
    MarketGen gen(35);
    for (int k = 0; k < 100; ++k) {
        const auto m = gen.market();
        const auto base = solve(m, Mode::nash);
        for (double init : {1e-3, 0.37, 45.0}) {
            SolveSettings s;
            s.initial_lambda = init;
            const auto r = solve(m, Mode::nash, s);
            EXPECT_NEAR(r.allocation.lam, base.allocation.lam, 4e-12 * base.allocation.lam);
            for (std::size_t i = 0; i < m.n_consumers(); ++i)
                EXPECT_NEAR(r.allocation.d[i], base.allocation.d[i], 1e-8);
            for (std::size_t j = 0; j < m.n_suppliers(); ++j)
                EXPECT_NEAR(r.allocation.s[j], base.allocation.s[j], 1e-8);
        }
    }
}

TEST(Properties, ZeroFloorWithLinearUtilities) {
    const MarketConfig m(0, 1.5, {UtilitySpec::linear(2), UtilitySpec::linear(1)},
                         {CostSpec::quadratic(1), CostSpec::power(0.5, 3), CostSpec::linear(0.4)});
    const auto eff = solve(m, Mode::efficient);
    const auto nash = solve(m, Mode::nash);
    EXPECT_LE(eff.kkt_residual, 1e-8);
    EXPECT_LE(nash.kkt_residual, 1e-8);
    EXPECT_LE(nash.welfare, eff.welfare + 1e-9);
}
