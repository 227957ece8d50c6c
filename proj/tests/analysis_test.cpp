#include <cmath>

#include <gtest/gtest.h>

#include "spmarket/analysis.hpp"
#include "spmarket/errors.hpp"
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

BoundsReport report_for(const MarketConfig& m) {
    return bounds_report(m, solve(m, Mode::efficient), solve(m, Mode::nash));
}

}  // namespace

TEST(Welfare, HandInstance) {
    const auto m = hand_market();
    EXPECT_NEAR(welfare(m, solve(m, Mode::efficient).allocation), 0.0, 1e-9);
    EXPECT_NEAR(welfare(m, solve(m, Mode::nash).allocation), -0.25, 1e-9);
}

TEST(Welfare, InfeasibleAllocations) {
    const auto m = hand_market();
    EXPECT_THROW(welfare(m, Allocation{{1}, {0.2, 0.2}, 1.0}), DomainError);
    EXPECT_THROW(welfare(m, Allocation{{0.5}, {0.25, 0.25}, 1.0}), DomainError);
    EXPECT_THROW(welfare(m, Allocation{{3}, {2.5, 0.5}, 1.0}), DomainError);
    EXPECT_THROW(welfare(m, Allocation{{1}, {1}, 1.0}), DomainError);
}

TEST(Bounds, HandInstance) {
    const auto r = report_for(hand_market());
    EXPECT_EQ(r.regime, BoundRegime::subcritical);
    EXPECT_NEAR(r.bound_general, 0.75 * 1 - 3 * 1, 1e-9);
    EXPECT_TRUE(r.general_holds);
    EXPECT_FALSE(r.bound_34_43.has_value());
    EXPECT_NEAR(r.lerner, 1.0 / 3, 1e-9);
    EXPECT_NEAR(r.lerner_bound, 2.0 / 3, 1e-15);
    EXPECT_FALSE(r.rho_s.has_value());
    EXPECT_NEAR(r.welfare_gap, 0.25, 1e-9);
    EXPECT_TRUE(r.all_hold());
}

TEST(Bounds, PivotalMarketRejected) {
    const MarketConfig m(1, 3, {UtilitySpec::log(1)}, {CostSpec::quadratic(1)});
    const auto eff = solve(m, Mode::efficient);
    EXPECT_THROW(bounds_report(m, eff, eff), PreconditionError);
}

TEST(Bounds, ReferenceInstanceCompetitiveRatio) {
    const auto m = reference_market(1.1);
    // zeta = 1.6, zeta - kappa0 = 0.5, min(kappa0, M d0) = 1.1
    EXPECT_NEAR(rho_c(m), 1.0 / (1 + 1.1 / 0.5), 1e-15);
    const auto r = report_for(m);
    ASSERT_TRUE(r.rho_s.has_value());
    EXPECT_LE(*r.rho_s, 1.0);
    EXPECT_TRUE(r.all_hold());
}

TEST(Bounds, LernerBoundNeedsASupplierBelowCapacity) {
    // Both suppliers sell kappa0: the price is set by (1 - d/A_d) beta on the demand side,
    // 10 * (1 - 2/3.5) = 30/7, far above the marginal cost 0.1 * 2.
    const MarketConfig m(0.5, 2, {UtilitySpec::linear(10), UtilitySpec::linear(10)},
                         {CostSpec::quadratic(0.1), CostSpec::quadratic(0.1)});
    const auto nash = solve(m, Mode::nash);
    EXPECT_NEAR(nash.allocation.lam, 30.0 / 7, 1e-9);
    EXPECT_NEAR(nash.allocation.s[0], 2.0, 1e-12);
    const auto r = bounds_report(m, solve(m, Mode::efficient), nash);
    EXPECT_NEAR(r.lerner, 1 - 0.2 * 7 / 30, 1e-9);
    EXPECT_NEAR(r.lerner_bound, 2.0 / 3, 1e-15);
    EXPECT_FALSE(r.lerner_holds);
    EXPECT_TRUE(r.general_holds);
}

TEST(RhoC, Examples) {
    const MarketConfig two(1, 1, {UtilitySpec::log(1)}, std::vector<CostSpec>(3, CostSpec::quadratic(1)));
    ASSERT_DOUBLE_EQ(two.zeta(), 2 * two.kappa0());
    EXPECT_DOUBLE_EQ(rho_c(two), 0.5);
    const MarketConfig wide(1, 1, {UtilitySpec::log(1)}, std::vector<CostSpec>(2000, CostSpec::quadratic(1)));
    EXPECT_GT(rho_c(wide), 0.999);
    EXPECT_THROW(rho_c(MarketConfig(1, 3, {UtilitySpec::log(1)}, {CostSpec::quadratic(1)})), DomainError);
}

TEST(Bounds, RandomInstances) {
    MarketGen gen(51);
    for (int k = 0; k < 200; ++k) {
        const auto m = gen.market();
        const auto eff = solve(m, Mode::efficient);
        const auto nash = solve(m, Mode::nash);
        const auto r = bounds_report(m, eff, nash);
        EXPECT_TRUE(r.general_holds) << "instance " << k << " nash " << r.welfare_nash << " bound " << r.bound_general;
        EXPECT_TRUE(r.ample_holds) << "instance " << k;
        bool saturated = true;
        for (double s : nash.allocation.s) saturated = saturated && s >= m.kappa0() - 1e-9;
        if (!saturated) EXPECT_TRUE(r.lerner_holds) << "instance " << k;
        if (r.rho_s) EXPECT_LE(*r.rho_s, 1.0 + 1e-12);
        EXPECT_EQ(r.bound_34_43.has_value(), r.regime == BoundRegime::ample);
    }
}

TEST(Regime, Boundaries) {
    // N = 3, M = 1, d0 = 1: zeta / kappa0 = 3 - 1/kappa0
    auto at = [](double kappa0) {
        return bound_regime(MarketConfig(1, kappa0, {UtilitySpec::log(1)}, std::vector<CostSpec>(3, CostSpec::quadratic(1))));
    };
    EXPECT_EQ(at(0.9), BoundRegime::subcritical);
    EXPECT_EQ(at(1.0), BoundRegime::moderate);
    const MarketConfig ample(1, 1, {UtilitySpec::log(1)}, std::vector<CostSpec>(5, CostSpec::quadratic(1)));
    EXPECT_EQ(bound_regime(ample), BoundRegime::ample);
}

TEST(Sweep, Values) {
    EXPECT_EQ(sweep_values(1, 2, 1), std::vector<double>{1.0});
    const auto v = sweep_values(1, 2, 5);
    ASSERT_EQ(v.size(), 5u);
    EXPECT_EQ(v.front(), 1.0);
    EXPECT_EQ(v.back(), 2.0);
    EXPECT_THROW(sweep_values(2, 1, 3), ConfigError);
    EXPECT_THROW(sweep_values(1, 2, 0), ConfigError);
}

TEST(Sweep, ConsumerAxisCyclesUtilities) {
    const auto m = config_at(reference_market(2), SweepAxis::n_consumers, 7);
    ASSERT_EQ(m.n_consumers(), 7u);
    EXPECT_EQ(m.utility(5).beta, m.utility(0).beta);
    EXPECT_EQ(m.utility(6).beta, m.utility(1).beta);
    EXPECT_EQ(config_at(reference_market(2), SweepAxis::kappa0, 3.5).kappa0(), 3.5);
    EXPECT_THROW(config_at(reference_market(2), SweepAxis::n_consumers, 0), ConfigError);
    EXPECT_EQ(parse_sweep_axis("n_consumers"), SweepAxis::n_consumers);
}

TEST(Sweep, SinglePointMatchesBoundsReport) {
    const auto base = reference_market(1.1);
    const std::vector<double> v{1.7};
    const auto res = sweep(base, SweepAxis::kappa0, v);
    ASSERT_EQ(res.points.size(), 1u);
    const auto direct = report_for(base.with_kappa0(1.7));
    ASSERT_TRUE(res.points[0].bounds.has_value());
    EXPECT_EQ(res.points[0].bounds->welfare_nash, direct.welfare_nash);
    EXPECT_EQ(res.points[0].bounds->rho_s, direct.rho_s);
    EXPECT_EQ(res.points[0].status, "ok");
}

TEST(Sweep, FlagsPivotalAndInfeasiblePoints) {
    const auto base = reference_market(1.1);
    // M d0 = 5: kappa0 = 0.8 infeasible (6*0.8 < 5), kappa0 = 0.9 pivotal (5*0.9 < 5)
    const std::vector<double> v{0.8, 0.9, 1.0, 1.2};
    const auto res = sweep(base, SweepAxis::kappa0, v);
    EXPECT_EQ(res.points[0].status, "infeasible");
    EXPECT_EQ(res.points[1].status, "pivotal");
    EXPECT_EQ(res.points[2].status, "pivotal");
    EXPECT_EQ(res.points[3].status, "ok");
}

TEST(Sweep, ThreadCountDoesNotChangeResults) {
    const auto base = reference_market(1.1);
    const auto v = sweep_values(1.1, 4.0, 30);
    const auto serial = sweep(base, SweepAxis::kappa0, v, {}, 1);
    const auto pooled = sweep(base, SweepAxis::kappa0, v, {}, 4);
    ASSERT_EQ(serial.points.size(), pooled.points.size());
    for (std::size_t k = 0; k < v.size(); ++k) {
        EXPECT_EQ(serial.points[k].axis_value, pooled.points[k].axis_value);
        EXPECT_EQ(serial.points[k].bounds->welfare_nash, pooled.points[k].bounds->welfare_nash);
    }
}

TEST(Sweep, LernerBoundShrinksWithCapacity) {
    const auto res = sweep(reference_market(1.1), SweepAxis::kappa0, sweep_values(1.1, 20, 40));
    double prev = INFINITY;
    for (const auto& p : res.points) {
        ASSERT_TRUE(p.bounds);
        EXPECT_LT(p.bounds->lerner_bound, prev);
        EXPECT_LE(p.bounds->lerner, p.bounds->lerner_bound);
        prev = p.bounds->lerner_bound;
    }
    // kappa0 / (N kappa0 - M d0) -> 1/N
    EXPECT_NEAR(prev, 1.0 / 6, 0.01);
}
