#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "agemp/scheduler.hpp"
#include "oracles.hpp"

using namespace agemp;
using namespace agemp::scheduler;

namespace {

HorizonInputs flat_inputs(int h, double spot, double load, double pv) {
    HorizonInputs in;
    in.spot_price.assign(h, spot);
    in.household_load.assign(h, load);
    in.pv_production.assign(h, pv);
    return in;
}

const lp::Solver& solver() {
    static const auto s = lp::make_default_solver();
    return *s;
}

class ToyOracle : public ::testing::TestWithParam<Strategy> {};

}  // namespace

TEST(Objective, StrategyWeights) {
    const auto p = strategy_objective(Strategy::Proposed);
    EXPECT_EQ(p.energy, 1.0);
    EXPECT_EQ(p.degradation, 1.0);
    EXPECT_EQ(strategy_objective(Strategy::EnergyOnly).degradation, 0.0);
    EXPECT_EQ(strategy_objective(Strategy::EnergyOnly).throughput, kThroughputTieBreak);
    EXPECT_EQ(strategy_objective(Strategy::DegradationOnly).energy, kEnergyTieBreak);
}

TEST(BuildProblem, FloorsAndPrices) {
    Scenario s;
    const ParkingSession session{100, 113, 113};
    const auto p = build_problem(s, session, 102, 0.5, 0.01, flat_inputs(12, 0.1, 0.5, 0.0));
    ASSERT_EQ(p.horizon(), 12);
    EXPECT_EQ(p.safety_start_hour(), 107);
    EXPECT_EQ(p.soe_lower[4], 0.1);
    EXPECT_EQ(p.soe_lower[5], 0.4);
    EXPECT_EQ(p.soe_lower_family[5], "safety_floor");
    EXPECT_EQ(p.soe_lower.back(), 0.8);
    EXPECT_EQ(p.soe_upper.front(), 0.9);
    EXPECT_NEAR(p.retail_price[0], oracle::retail(0.1), 1e-15);
    EXPECT_NEAR(p.nv_eur, 79.0 * oracle::nv_per_kwh(52.46, 0.2, 0.04, 10), 1e-9);
    EXPECT_THROW(build_problem(s, session, 99, 0.5, 0.01, flat_inputs(15, 0.1, 0.5, 0.0)), std::invalid_argument);
    EXPECT_THROW(build_problem(s, session, 102, 0.5, 0.01, flat_inputs(5, 0.1, 0.5, 0.0)), std::invalid_argument);
}

TEST_P(ToyOracle, MatchesBruteForce) {
    std::mt19937_64 rng(1000 + static_cast<int>(GetParam()));
    int feasible = 0;
    for (int i = 0; i < 60; ++i) {
        const auto p = oracle::make_toy(rng, GetParam());
        const double brute = oracle::brute_force(p);
        const auto sol = solve(p, solver());
        if (!std::isfinite(brute)) {
            EXPECT_FALSE(sol.ok()) << i;
            continue;
        }
        ++feasible;
        ASSERT_TRUE(sol.ok()) << i;
        const double value = oracle::evaluate(p, sol);
        double slack = 1e-9 + 2e-6 * std::abs(brute);
        if (GetParam() == Strategy::DegradationOnly) slack += kEnergyTieBreak * 10.0 * p.horizon();
        EXPECT_LE(value, brute + slack) << i;
        EXPECT_LE(brute - value, oracle::step_cost(p)) << i;
        EXPECT_LE(max_constraint_violation(p, sol), 1e-7) << i;
        if (sol.churn_hours.empty()) EXPECT_NEAR(recompute_objective(p, sol), value, 1e-9) << i;
        if (GetParam() == Strategy::Unidirectional) {
            for (const auto& f : sol.flows) EXPECT_EQ(f.ev_discharge(), 0.0);
        }
        for (int k = 0; k < p.horizon(); ++k) {
            EXPECT_GE(sol.soe[k], p.soe_lower[k] - 1e-9);
            EXPECT_LE(sol.soe[k], p.soe_upper[k] + 1e-9);
        }
    }
    EXPECT_GE(feasible, 20);
}

INSTANTIATE_TEST_SUITE_P(AllStrategies, ToyOracle,
                         ::testing::Values(Strategy::Proposed, Strategy::Unidirectional, Strategy::EnergyOnly,
                                           Strategy::DegradationOnly),
                         [](const auto& info) {
                             std::string n(to_string(info.param));
                             std::erase(n, '-');
                             return n;
                         });

TEST(Solve, SellsAtPeakWhenGammaIsOne) {
    Scenario s;
    s.ev.usable_capacity_kwh = 10.0;
    s.ev.max_hourly_energy_kwh = 1.0;
    HorizonInputs in = flat_inputs(6, 0.05, 0.0, 0.0);
    in.spot_price[2] = 1.0;
    const ParkingSession session{0, 5, 5};
    const auto sol = solve(build_problem(s, session, 0, 0.7, 0.0, in), solver());
    ASSERT_TRUE(sol.ok());
    EXPECT_NEAR(sol.flows[2].v2g, 1.0, 1e-9);
    s.tariff.v2g_price_ratio = 0.0;
    const auto none = solve(build_problem(s, session, 0, 0.7, 0.0, in), solver());
    ASSERT_TRUE(none.ok());
    for (const auto& f : none.flows) EXPECT_NEAR(f.v2g, 0.0, 1e-9);
}

TEST(Solve, FallbackChargesFlatOut) {
    Scenario s;
    s.ev.usable_capacity_kwh = 10.0;
    s.ev.max_hourly_energy_kwh = 1.0;
    const ParkingSession session{0, 1, 1};
    const auto p = build_problem(s, session, 0, 0.2, 0.01, flat_inputs(2, 0.1, 0.3, 0.0));
    const auto plain = solve(p, solver());
    EXPECT_EQ(plain.status, lp::Status::Infeasible);
    EXPECT_FALSE(plain.infeasible_families.empty());
    const auto fb = solve_with_fallback(p, solver());
    ASSERT_TRUE(fb.ok());
    EXPECT_TRUE(fb.relaxed);
    EXPECT_NEAR(fb.soe[0], 0.3, 1e-8);
    EXPECT_NEAR(fb.soe[1], 0.4, 1e-8);
}

TEST(Solve, ConvexifiedBoundsExact) {
    std::mt19937_64 rng(77);
    for (int i = 0; i < 20; ++i) {
        auto p = oracle::make_toy(rng, Strategy::Proposed);
        p.pwl_mode = PwlMode::Exact;
        const auto exact = solve(p, solver());
        p.pwl_mode = PwlMode::Convexified;
        const auto convex = solve(p, solver());
        if (!exact.ok()) continue;
        ASSERT_TRUE(convex.ok());
        EXPECT_LE(convex.objective, exact.objective + 1e-9) << i;
    }
}

TEST(Encode, RejectsBoundsOutsidePwlDomain) {
    Scenario s;
    const ParkingSession session{0, 3, 3};
    auto p = build_problem(s, session, 0, 0.5, 0.01, flat_inputs(4, 0.1, 0.3, 0.0));
    p.soe_upper[1] = 0.95;
    EXPECT_THROW(encode(p), ConfigError);
    p = build_problem(s, session, 0, 0.5, 0.01, flat_inputs(4, 0.1, 0.3, 0.0));
    p.spot_price.pop_back();
    EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(Encode, ColumnsPerHour) {
    Scenario s;
    const ParkingSession session{0, 3, 3};
    const auto p = build_problem(s, session, 0, 0.5, 0.01, flat_inputs(4, 0.1, 0.3, 0.2));
    const auto e = encode(p);
    EXPECT_EQ(e.col_soe.size(), 4u);
    EXPECT_TRUE(e.has_degradation_columns);
    EXPECT_EQ(e.degradation.delta.size(), 4u);
    EXPECT_EQ(e.degradation.delta[0].size(), 8u);
    EXPECT_EQ(e.degradation.binaries.size(), 4u * 3u);
    s.strategy = Strategy::EnergyOnly;
    EXPECT_FALSE(encode(build_problem(s, session, 0, 0.5, 0.01, flat_inputs(4, 0.1, 0.3, 0.2))).has_degradation_columns);
}
