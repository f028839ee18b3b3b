#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "agemp/domain.hpp"

namespace agemp {

enum class Strategy { Proposed, Unidirectional, EnergyOnly, DegradationOnly };

/// Parses "proposed", "unidirectional", "energy-only", "degradation-only".
/// Throws std::invalid_argument for anything else.
Strategy parse_strategy(std::string_view name);
std::string_view to_string(Strategy s);

/// Exact: binary segment selection at every concave PWL kink.
/// Convexified: the LP relaxation, i.e. the convex envelope of the PWL.
enum class PwlMode { Exact, Convexified };

PwlMode parse_pwl_mode(std::string_view name);
std::string_view to_string(PwlMode m);

struct TruncatedGaussian {
    double mean = 0.0;
    double stddev = 0.0;
    double min = 0.0;
    double max = 0.0;

    void validate(std::string_view what) const;
};

struct DrivingPatternModel {
    TruncatedGaussian pickup_hour{6.7, 0.8, 4.0, 10.0};
    TruncatedGaussian parking_start_hour{17.0, 1.2, 14.0, 21.0};
    TruncatedGaussian daily_distance_km{31.2, 10.0, 5.0, 60.0};

    void validate() const;
};

enum class ForecastKind { PerfectForesight, Persistence, SeasonalNaive, External };

ForecastKind parse_forecast_kind(std::string_view name);
std::string_view to_string(ForecastKind k);

struct ForecastSettings {
    ForecastKind provider = ForecastKind::SeasonalNaive;
    /// Command line of the external provider process (ForecastKind::External).
    std::string external_command;
};

struct DataSources {
    /// Empty paths select the deterministic synthetic generator.
    std::string spot_price_csv;
    std::string household_load_csv;
    std::string irradiance_csv;
    std::uint64_t synthetic_seed = 2022;
    double load_scale = 1.0;
};

struct UncertaintySettings {
    double pickup_error_pct = 0.0;  ///< e; zero disables perturbation
    double p_change = 0.8;
    std::uint64_t seed = 1;
};

struct Scenario {
    std::string name = "scenario";
    EvSpec ev;
    PvSpec pv;
    Tariff tariff;
    BatteryEconomics economics;
    DegradationParams degradation;
    DrivingPatternModel driving;
    ForecastSettings forecast;
    DataSources data;
    UncertaintySettings uncertainty;

    Strategy strategy = Strategy::Proposed;
    PwlMode pwl_mode = PwlMode::Exact;
    double grid_cap_kwh = 1e6;
    HourIndex simulation_hours = kHoursPerYear;
    std::uint64_t seed = 7;
    /// Directory for per-solve debug dumps; empty disables them.
    std::string debug_dump_dir;

    void validate() const;
};

}  // namespace agemp
