#include <gtest/gtest.h>

#include "agemp/domain.hpp"
#include "agemp/scenario.hpp"
#include "oracles.hpp"

using namespace agemp;

TEST(NetPresentValue, DefaultEconomics) {
    BatteryEconomics econ;
    EXPECT_NEAR(compute_net_present_value(econ, 1.0), 28.35, 0.01);
    EXPECT_NEAR(compute_net_present_value(econ, 79.0), 79.0 * oracle::nv_per_kwh(52.46, 0.2, 0.04, 10), 1e-9);
    EXPECT_THROW(compute_net_present_value(econ, 0.0), std::invalid_argument);
}

TEST(NetPresentValue, ZeroDiscountIsUndiscounted) {
    BatteryEconomics econ;
    econ.discount_rate = 0.0;
    EXPECT_DOUBLE_EQ(compute_net_present_value(econ, 2.0), 2.0 * 0.8 * 52.46);
}

TEST(RetailPrice, FeesThenVat) {
    Tariff t;
    for (double spot : {0.0, 0.05, 0.31, -0.01}) EXPECT_NEAR(retail_price(spot, t), oracle::retail(spot), 1e-15);
    t.vat_rate = 0.0;
    EXPECT_NEAR(retail_price(0.1, t), 0.1 + 0.0498, 1e-15);
    EXPECT_THROW(retail_price(std::nan(""), t), std::invalid_argument);
}

TEST(BatteryCost, ScalesByRemainingLife) {
    EXPECT_DOUBLE_EQ(battery_cost(1.0, 2000.0, 80.0), 100.0);
    EXPECT_DOUBLE_EQ(battery_cost(0.0, 2000.0, 80.0), 0.0);
    EXPECT_THROW(battery_cost(-1e-3, 2000.0, 80.0), std::invalid_argument);
    EXPECT_THROW(battery_cost(1.0, 2000.0, 100.0), std::invalid_argument);
}

TEST(Validation, EvOrdering) {
    EvSpec ev;
    EXPECT_NO_THROW(ev.validate());
    ev.safety_soe = 0.85;
    EXPECT_THROW(ev.validate(), ConfigError);
    ev = EvSpec{};
    ev.initial_soe = 0.95;
    EXPECT_THROW(ev.validate(), ConfigError);
    ev = EvSpec{};
    ev.usable_capacity_kwh = 0.0;
    EXPECT_THROW(ev.validate(), ConfigError);
}

TEST(Validation, TariffAndEconomics) {
    Tariff t;
    t.v2g_price_ratio = 1.2;
    EXPECT_THROW(t.validate(), ConfigError);
    BatteryEconomics e;
    e.eol_capacity_pct = 100.0;
    EXPECT_THROW(e.validate(), ConfigError);
    e = BatteryEconomics{};
    e.residual_fraction = 1.0;
    EXPECT_THROW(e.validate(), ConfigError);
}

TEST(Validation, DegradationParams) {
    DegradationParams p;
    EXPECT_NO_THROW(p.validate());
    p.pwl_breakpoints = {0.3, 0.2};
    p.pwl_slope_changes = {0.0, 0.0};
    EXPECT_THROW(p.validate(), ConfigError);
    p = DegradationParams{};
    p.pwl_slope_changes.pop_back();
    EXPECT_THROW(p.validate(), ConfigError);
}

TEST(Validation, Scenario) {
    Scenario s;
    EXPECT_NO_THROW(s.validate());
    s.ev.soe_min = 0.05;
    s.ev.initial_soe = 0.6;
    EXPECT_THROW(s.validate(), ConfigError);
    s = Scenario{};
    s.uncertainty.pickup_error_pct = 100.0;
    EXPECT_THROW(s.validate(), ConfigError);
    s = Scenario{};
    s.forecast.provider = ForecastKind::External;
    EXPECT_THROW(s.validate(), ConfigError);
    s = Scenario{};
    s.driving.pickup_hour.max = 20.0;
    EXPECT_THROW(s.validate(), ConfigError);
}

TEST(Names, RoundTrip) {
    for (Strategy s : {Strategy::Proposed, Strategy::Unidirectional, Strategy::EnergyOnly, Strategy::DegradationOnly})
        EXPECT_EQ(parse_strategy(to_string(s)), s);
    for (ForecastKind k : {ForecastKind::PerfectForesight, ForecastKind::Persistence, ForecastKind::SeasonalNaive,
                           ForecastKind::External})
        EXPECT_EQ(parse_forecast_kind(to_string(k)), k);
    EXPECT_EQ(parse_pwl_mode(to_string(PwlMode::Convexified)), PwlMode::Convexified);
    EXPECT_THROW(parse_strategy("greedy"), std::invalid_argument);
    EXPECT_EQ(to_string(Mode::Idle), "idle");
}

TEST(Session, DurationCountsBothEnds) {
    ParkingSession s{17, 30, 30};
    EXPECT_EQ(s.duration(), 14);
    EXPECT_FALSE(s.perturbed());
    s.actual_pickup_hour = 32;
    EXPECT_TRUE(s.perturbed());
}
