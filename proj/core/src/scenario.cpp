#include "agemp/scenario.hpp"

#include <stdexcept>
#include <string>

namespace agemp {

Strategy parse_strategy(std::string_view name) {
    if (name == "proposed") return Strategy::Proposed;
    if (name == "unidirectional") return Strategy::Unidirectional;
    if (name == "energy-only") return Strategy::EnergyOnly;
    if (name == "degradation-only") return Strategy::DegradationOnly;
    throw std::invalid_argument("unknown strategy: " + std::string(name));
}

std::string_view to_string(Strategy s) {
    switch (s) {
        case Strategy::Proposed: return "proposed";
        case Strategy::Unidirectional: return "unidirectional";
        case Strategy::EnergyOnly: return "energy-only";
        case Strategy::DegradationOnly: return "degradation-only";
    }
    return "unknown";
}

PwlMode parse_pwl_mode(std::string_view name) {
    if (name == "exact") return PwlMode::Exact;
    if (name == "convexified") return PwlMode::Convexified;
    throw std::invalid_argument("unknown pwl mode: " + std::string(name));
}

std::string_view to_string(PwlMode m) {
    return m == PwlMode::Exact ? "exact" : "convexified";
}

ForecastKind parse_forecast_kind(std::string_view name) {
    if (name == "perfect-foresight") return ForecastKind::PerfectForesight;
    if (name == "persistence") return ForecastKind::Persistence;
    if (name == "seasonal-naive") return ForecastKind::SeasonalNaive;
    if (name == "external") return ForecastKind::External;
    throw std::invalid_argument("unknown forecast provider: " + std::string(name));
}

std::string_view to_string(ForecastKind k) {
    switch (k) {
        case ForecastKind::PerfectForesight: return "perfect-foresight";
        case ForecastKind::Persistence: return "persistence";
        case ForecastKind::SeasonalNaive: return "seasonal-naive";
        case ForecastKind::External: return "external";
    }
    return "unknown";
}

void TruncatedGaussian::validate(std::string_view what) const {
    if (!(min <= mean && mean <= max) || stddev < 0.0) {
        throw ConfigError(std::string(what) + ": require min <= mean <= max and std >= 0");
    }
}

void DrivingPatternModel::validate() const {
    pickup_hour.validate("driving.pickup_hour");
    parking_start_hour.validate("driving.parking_start_hour");
    daily_distance_km.validate("driving.daily_distance_km");
    if (pickup_hour.max < 0.0 || parking_start_hour.max > 23.0) {
        throw ConfigError("driving: pickup and parking hours must lie within the day");
    }
    if (pickup_hour.max + 2.0 > parking_start_hour.min) {
        throw ConfigError("driving: latest pickup must precede the earliest parking start by >= 2 h");
    }
    if (daily_distance_km.min < 0.0) throw ConfigError("driving: distance must be >= 0");
}

void Scenario::validate() const {
    ev.validate();
    pv.validate();
    tariff.validate();
    economics.validate();
    degradation.validate();
    driving.validate();
    if (ev.soe_min < degradation.pwl_domain_lo || ev.soe_max > degradation.pwl_domain_hi) {
        throw ConfigError("ev SoE bounds must lie inside the degradation PWL domain");
    }
    if (grid_cap_kwh < 0.0) throw ConfigError("grid.cap_kwh must be >= 0");
    if (simulation_hours <= 0) throw ConfigError("simulation.hours must be > 0");
    if (data.load_scale < 0.0) throw ConfigError("data.load_scale must be >= 0");
    if (uncertainty.pickup_error_pct < 0.0 || uncertainty.pickup_error_pct >= 100.0) {
        throw ConfigError("uncertainty.pickup_error_pct must lie in [0, 100)");
    }
    if (uncertainty.p_change < 0.0 || uncertainty.p_change > 1.0) {
        throw ConfigError("uncertainty.p_change must lie in [0, 1]");
    }
    if (forecast.provider == ForecastKind::External && forecast.external_command.empty()) {
        throw ConfigError("forecast.external_command is required for the external provider");
    }
}

}  // namespace agemp
