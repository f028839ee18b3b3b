#pragma once

/**
 * @file simulator.hpp
 * @brief Year-long closed loop: parked replanning, driving, plant-side
 * degradation accounting, cost ledger and sensitivity sweeps.
 */

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "agemp/degradation.hpp"
#include "agemp/domain.hpp"
#include "agemp/forecast.hpp"
#include "agemp/lp.hpp"
#include "agemp/scenario.hpp"

namespace agemp::sim {

/// Hourly exogenous series indexed by global hour.
struct YearData {
    std::vector<double> spot_price;   ///< €/kWh
    std::vector<double> household_load;  ///< kWh, before load_scale
    std::vector<double> irradiance;   ///< SR_t in [0, 1]

    /// Throws std::invalid_argument when a series is shorter than `hours`.
    void require(HourIndex hours) const;
};

using Rng = std::mt19937_64;

/// Rejection sampling from the truncated Gaussian; after 1000 rejections the
/// clamped mean is returned and `fell_back` is set.
double sample_truncated(const TruncatedGaussian& g, Rng& rng, bool* fell_back = nullptr);

struct DaySample {
    double pickup_hour = 0.0;
    double parking_start_hour = 0.0;
    double distance_km = 0.0;
    bool fell_back = false;
};

DaySample sample_day(const DrivingPatternModel& pattern, Rng& rng);

struct DriveResult {
    double soe = 0.0;
    bool below_min = false;  ///< trip pushed SoE under soe_min
};

/// SoE after driving `distance_km`; floored at 0.
DriveResult driving_step(double soe, double distance_km, const EvSpec& ev);

/// EV absent: PV serves the load first, surplus is exported up to the PV
/// output limit, the rest is curtailed; the grid covers any deficit.
HourlyFlows rule_based_home_dispatch(double household_load, double pv, double pv_max_kwh);

/// Uniform draws behind one pickup perturbation, kept separate from the
/// shift size so that several error levels can share them.
struct PerturbationDraw {
    double change = 1.0;     ///< compared with p_change
    bool later = false;
    double magnitude = 0.0;  ///< in [0, 1)
};

PerturbationDraw draw_perturbation(Rng& rng);

/// Applies a draw: with probability p_change the actual pickup moves by
/// 1..floor(e * T_p / 100) hours, clamped to [arrival + 1, latest_pickup].
ParkingSession perturb_pickup(const ParkingSession& session, double e_pct, double p_change,
                              const PerturbationDraw& draw, HourIndex latest_pickup);

/// Convenience overload drawing from `rng`.
ParkingSession perturb_pickup(const ParkingSession& session, double e_pct, double p_change,
                              Rng& rng, HourIndex latest_pickup);

struct Violation {
    HourIndex hour = 0;
    std::string kind;
    std::string detail;
};

/// Everything the ledger replay needs for one hour.
struct HourRecord {
    LedgerEntry ledger;
    HourlyFlows flows;
    double soe_start = 0.0;
    double soe_end = 0.0;
    double spot_price = 0.0;
    double retail_price = 0.0;
    double household_load = 0.0;
    double pv_production = 0.0;
    double dq_cal_pct = 0.0;
    double dq_cyc_pct = 0.0;
    double efc = 0.0;
    double q_loss_pct = 0.0;  ///< cumulative after this hour
    double soe_floor = 0.0;   ///< parked lower bound at this hour (0 when not parked)
    bool relaxed = false;     ///< plan came from the infeasibility fallback
};

struct SimulationResult {
    std::string label;
    Strategy strategy = Strategy::Proposed;
    double fc_eur = 0.0;
    double ec_eur = 0.0;
    double er_eur = 0.0;
    double bc_eur = 0.0;
    double fixed_eur = 0.0;  ///< monthly tax plus annualised PV cost
    double q_cal_pct = 0.0;
    double q_cyc_pct = 0.0;
    double q_loss_pct = 0.0;
    double efc = 0.0;
    double v2g_kwh = 0.0;
    double v2h_kwh = 0.0;
    std::int64_t solves = 0;
    std::int64_t relaxed_solves = 0;
    std::vector<HourRecord> records;
    std::vector<Violation> violations;
    std::vector<ParkingSession> sessions;
};

struct RunOptions {
    /// Keep the cycle-rate coefficient fixed for a whole session.
    bool freeze_kcyc_per_session = false;
    /// Keep per-hour records.
    bool keep_records = true;
    lp::Options solver;
    /// Backend name for lp::make_solver.
    std::string backend = "default";
};

/// Daily pattern for the scenario: declared sessions plus trip distances.
struct Schedule {
    std::vector<ParkingSession> sessions;   ///< actual pickups filled in
    std::vector<double> trip_distance_km;   ///< trip after sessions[i]
    std::vector<Violation> notes;
};

/// Sessions from hour 0 (parked) through the end of the horizon. Pickups are
/// perturbed when the scenario carries a pickup error.
Schedule build_schedule(const Scenario& scenario);

/// Runs the closed loop. Throws std::invalid_argument for missing data.
SimulationResult run_year(const Scenario& scenario, const YearData& data,
                          const RunOptions& options = {});

enum class SweepAxis { Gamma, Battery, LoadScale, PickupUncertainty, PvSize };

/// "gamma", "battery", "load-scale", "pickup-uncertainty", "pv-size".
SweepAxis parse_sweep_axis(std::string_view name);
std::string_view to_string(SweepAxis axis);

/// Default grid per axis: gamma 0..1 (11 points), battery 50.8..109.1 kWh,
/// load scale {1, 4}, pickup error {0, 10, 30, 50} %, PV 0..50 kWh step 5.
std::vector<double> default_grid(SweepAxis axis);
/// Evenly spaced `steps` points over the default range of the axis.
std::vector<double> grid_with_steps(SweepAxis axis, int steps);

struct SweepSpec {
    SweepAxis axis = SweepAxis::Gamma;
    std::vector<double> values;
    std::vector<Strategy> strategies{Strategy::Proposed, Strategy::Unidirectional};
    /// Replicate seeds; each replicate perturbs pickups with its own stream.
    std::vector<std::uint64_t> seeds{1};
    int threads = 0;  ///< 0: hardware concurrency
};

/// Applies one axis value to a scenario copy.
Scenario apply_axis(const Scenario& base, SweepAxis axis, double value);

struct SweepRow {
    double value = 0.0;
    std::uint64_t seed = 0;
    SimulationResult result;  ///< records dropped
};

struct SweepResult {
    SweepAxis axis = SweepAxis::Gamma;
    std::vector<SweepRow> rows;

    const SweepRow* find(double value, std::uint64_t seed, Strategy s) const;
    /// FC(unidirectional) - FC(proposed) at one grid point and seed.
    double economic_gain(double value, std::uint64_t seed) const;
    /// Q_loss(proposed) - Q_loss(unidirectional).
    double additional_degradation(double value, std::uint64_t seed) const;
};

/// Runs every (value, seed, strategy) point; runs are independent and go in parallel.
SweepResult run_sweep(const Scenario& base, const YearData& data, const SweepSpec& spec,
                      const RunOptions& options = {});

}  // namespace agemp::sim
