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

const BidProfile kHandNash{{0}, {1.125, 1.125}};

std::size_t n_agents(const MarketConfig& m) { return m.n_consumers() + m.n_suppliers(); }

}  // namespace

TEST(Payoff, HandInstance) {
    const auto m = hand_market();
    EXPECT_NEAR(supplier_payoff(m, 1, 1.125, kHandNash), 0.25, 1e-15);
    EXPECT_NEAR(supplier_payoff(m, 0, 1.125, kHandNash), 0.25, 1e-15);
    EXPECT_NEAR(consumer_payoff(m, 0, 0.0, kHandNash), -0.75, 1e-15);
}

TEST(Payoff, OfferAtThetaMaxEarnsNothing) {
    const auto m = hand_market();
    const double tmax = supplier_theta_max(m, 0, kHandNash);
    EXPECT_NEAR(tmax, 2.0 / 1.0 * 1.125, 1e-15);
    EXPECT_NEAR(supplier_payoff(m, 0, tmax, kHandNash), 0.0, 1e-14);
}

TEST(Payoff, ZeroTotalBidIsDomainError) {
    const auto m = hand_market();
    EXPECT_THROW(supplier_payoff(m, 0, 0.0, BidProfile{{0}, {0, 0}}), DomainError);
}

TEST(Payoff, MatchesAllocationAccounting) {
    MarketGen gen(41);
    for (int k = 0; k < 200; ++k) {
        const auto m = gen.market();
        const auto r = solve(m, Mode::nash);
        const auto& a = r.allocation;
        for (std::size_t i = 0; i < m.n_consumers(); ++i) {
            const double want = utility_value(m.utility(i), m.d0(), a.d[i]) - a.lam * a.d[i];
            EXPECT_NEAR(consumer_payoff(m, i, r.bids.theta_d[i], r.bids), want, 1e-10 * std::max(1.0, std::abs(want)));
        }
        for (std::size_t j = 0; j < m.n_suppliers(); ++j) {
            const double want = a.lam * a.s[j] - cost_value(m.cost(j), a.s[j]);
            EXPECT_NEAR(supplier_payoff(m, j, r.bids.theta_s[j], r.bids), want, 1e-10 * std::max(1.0, std::abs(want)));
        }
    }
}

TEST(BestResponse, HandNashIsCertified) {
    const auto rep = verify_best_response(hand_market(), kHandNash);
    EXPECT_TRUE(rep.certified);
    for (const auto& p : rep.players) EXPECT_GE(p.gap, -1e-6 * std::max(1.0, std::abs(p.candidate_payoff)));
    EXPECT_EQ(rep.players.size(), 3u);
    EXPECT_EQ(rep.theta_max.size(), 2u);
}

TEST(BestResponse, DoubledOfferIsNotCertified) {
    BidProfile b = kHandNash;
    b.theta_s[0] *= 2;
    const auto rep = verify_best_response(hand_market(), b);
    EXPECT_FALSE(rep.certified);
    EXPECT_EQ(rep.worst_player, 1u);
}

TEST(BestResponse, CompetitiveBidsAreNotNashWhenAllocationsDiffer) {
    MarketGen gen(42);
    int checked = 0;
    for (int k = 0; k < 60; ++k) {
        const auto m = gen.market();
        const auto eff = solve(m, Mode::efficient);
        const auto nash = solve(m, Mode::nash);
        double diff = std::abs(eff.allocation.lam - nash.allocation.lam);
        for (std::size_t j = 0; j < m.n_suppliers(); ++j) diff = std::max(diff, std::abs(eff.allocation.s[j] - nash.allocation.s[j]));
        if (diff < 1e-3 || eff.bids.total() == 0.0) continue;
        ++checked;
        const auto rep = verify_best_response(m, eff.bids, 801);
        double worst = 0;
        for (double g : rep.gaps()) worst = std::min(worst, g);
        EXPECT_LT(worst, 0.0) << "instance " << k;
        EXPECT_FALSE(rep.certified) << "instance " << k;
    }
    EXPECT_GT(checked, 20);
}

TEST(BestResponse, UnilateralDeviationsDoNotPay) {
    MarketGen gen(43);
    for (int k = 0; k < 50; ++k) {
        const auto m = gen.market();
        const auto r = solve(m, Mode::nash);
        const auto& b = r.bids;
        for (std::size_t i = 0; i < m.n_consumers(); ++i) {
            const double base = consumer_payoff(m, i, b.theta_d[i], b);
            for (double f : {1.1, 0.9}) {
                const double dev = consumer_payoff(m, i, b.theta_d[i] * f, b);
                EXPECT_LE(dev, base + 1e-6 * std::max(1.0, std::abs(base)));
            }
        }
        for (std::size_t j = 0; j < m.n_suppliers(); ++j) {
            const double base = supplier_payoff(m, j, b.theta_s[j], b);
            for (double f : {1.1, 0.9}) {
                const double dev = supplier_payoff(m, j, b.theta_s[j] * f, b);
                EXPECT_LE(dev, base + 1e-6 * std::max(1.0, std::abs(base)));
            }
        }
    }
}

TEST(Kkt, SolverOutputPasses) {
    MarketGen gen(44);
    for (int k = 0; k < 100; ++k) {
        const auto m = gen.market();
        for (Mode mode : {Mode::efficient, Mode::nash}) {
            const auto r = solve(m, mode);
            const auto rep = kkt_residuals(m, r);
            EXPECT_LE(rep.worst_residual, 1e-8);
            EXPECT_EQ(rep.residuals.size(), n_agents(m));
        }
    }
}

TEST(Kkt, PerturbedInteriorAgentIsFlagged) {
    const MarketConfig m(1, 2, {UtilitySpec::log(3)}, {CostSpec::quadratic(1), CostSpec::quadratic(1)});
    const auto r = solve(m, Mode::nash);
    ASSERT_GT(r.allocation.d[0], m.d0() + 0.1);
    Allocation a = r.allocation;
    a.d[0] += 0.01;
    const auto rep = kkt_residuals(m, Mode::nash, a);
    EXPECT_EQ(rep.worst_agent, 0u);
    const double h = 1e-5;
    const double second = (modified_utility_marginal(m, 0, a.d[0] + h) - modified_utility_marginal(m, 0, a.d[0] - h)) / (2 * h);
    EXPECT_NEAR(rep.worst_residual, std::abs(second) * 0.01, 0.05 * std::abs(second) * 0.01);
    EXPECT_NEAR(rep.clearing_residual, 0.01, 1e-8);
}

TEST(Kkt, SlackBoundaryAgentHasZeroResidual) {
    const auto r = solve(hand_market(), Mode::nash);
    Allocation a = r.allocation;
    a.d[0] = 1.0;
    a.lam = 0.9;  // marginal at d0 is 0.75 < 0.9
    const auto rep = kkt_residuals(hand_market(), Mode::nash, a);
    EXPECT_EQ(rep.branches[0], Branch::lower);
    EXPECT_EQ(rep.residuals[0], 0.0);
}

TEST(Kkt, AgreesWithBestResponse) {
    MarketGen gen(45);
    int agree = 0, total = 0;
    for (int k = 0; k < 100; ++k) {
        const auto m = gen.market(gen.integer(1, 4), gen.integer(2, 4));
        const auto r = solve(m, Mode::nash);
        BidProfile b = r.bids;
        if (k % 2 == 1) {
            // Shift one supplier's offer so the profile is no longer an equilibrium.
            const std::size_t j = static_cast<std::size_t>(gen.integer(0, static_cast<int>(m.n_suppliers()) - 1));
            b.theta_s[j] = b.theta_s[j] * 1.5 + 0.05 * r.allocation.lam * m.kappa0();
        }
        const Allocation a = allocation_from_bids(m, b);
        bool feasible = true;
        for (double s : a.s) feasible = feasible && s >= -1e-9;
        const bool kkt_ok = feasible && kkt_residuals(m, Mode::nash, a).worst_residual <= 1e-6;
        const bool br_ok = verify_best_response(m, b, 801).certified;
        ++total;
        agree += kkt_ok == br_ok ? 1 : 0;
        EXPECT_EQ(kkt_ok, br_ok) << "instance " << k;
    }
    EXPECT_EQ(agree, total);
}

TEST(Pivotal, SlopeStaysPositive) {
    const MarketConfig m(1, 2, std::vector<UtilitySpec>(3, UtilitySpec::log(1)),
                         std::vector<CostSpec>(2, CostSpec::quadratic(1)));
    ASSERT_TRUE(has_pivotal_supplier(m));
    const BidProfile b{{0.2, 0.1, 0.3}, {0.5, 0.4}};
    EXPECT_TRUE(detect_pivotal_unboundedness(m, b));
    BidProfile big = b;
    for (double& t : big.theta_d) t *= 100;
    for (double& t : big.theta_s) t *= 100;
    EXPECT_TRUE(detect_pivotal_unboundedness(m, big));
    EXPECT_GT(supplier_payoff_slope(m, 0, b), 0.0);
}

TEST(Pivotal, NonPivotalMarketIsAPreconditionError) {
    EXPECT_THROW(detect_pivotal_unboundedness(hand_market(), kHandNash), PreconditionError);
}
