#pragma once

/**
 * @file scheduler.hpp
 * @brief Parking-mode shrinking-horizon optimisation.
 *
 * A HorizonProblem covers the hours t̄..t_p of one parking session. Index 0
 * of every exogenous vector is a measurement; later entries are forecasts.
 * The problem is encoded as a MILP over the hourly flows, the SoE
 * trajectory and an incremental PWL representation of the calendar rate.
 */

#include <span>
#include <string>
#include <vector>

#include "agemp/degradation.hpp"
#include "agemp/domain.hpp"
#include "agemp/lp.hpp"
#include "agemp/scenario.hpp"

namespace agemp::scheduler {

/// Tie-break penalty on total EV throughput for strategies without a
/// degradation term (€/kWh).
inline constexpr double kThroughputTieBreak = 1e-9;
/// Weight of the energy term in the degradation-only strategy, used only
/// to break ties among equal-degradation schedules.
inline constexpr double kEnergyTieBreak = 1e-6;

struct ObjectiveWeights {
    double energy = 1.0;
    double degradation = 1.0;
    double throughput = 0.0;
};

/// Objective weights for a strategy (see strategy_objective in the docs).
ObjectiveWeights strategy_objective(Strategy strategy);

struct HorizonInputs {
    std::vector<double> spot_price;      // €/kWh
    std::vector<double> household_load;  // kWh
    std::vector<double> pv_production;   // kWh (SR_t * E_PV_tot already applied)
};

struct HorizonProblem {
    HourIndex current_hour = 0;
    HourIndex arrival_hour = 0;
    HourIndex pickup_hour = 0;
    double initial_soe = 0.0;

    std::vector<double> retail_price;
    std::vector<double> spot_price;
    std::vector<double> household_load;
    std::vector<double> pv_production;
    std::vector<double> grid_cap;

    std::vector<double> soe_lower;
    std::vector<double> soe_upper;
    std::vector<std::string> soe_lower_family;

    Strategy strategy = Strategy::Proposed;
    PwlMode pwl_mode = PwlMode::Exact;
    double gamma = 1.0;
    double kcyc_pct = 0.0;  ///< frozen cycle rate, percent per EFC
    degradation::PwlCalendarModel pwl;
    double rate_to_pct = 100.0;
    double nv_eur = 0.0;
    double eol_pct = 80.0;

    double capacity_kwh = 0.0;
    double ev_max_kwh = 0.0;
    double pv_max_kwh = 0.0;

    int horizon() const { return static_cast<int>(retail_price.size()); }
    HourIndex session_duration() const { return pickup_hour - arrival_hour + 1; }
    /// First hour at which the safety floor applies: t_a + floor(T_p / 2).
    HourIndex safety_start_hour() const { return arrival_hour + session_duration() / 2; }
    void validate() const;
};

/// Assembles the problem at hour `now` for the session, with SoE bounds,
/// safety floor and pickup requirement laid out per hour.
HorizonProblem build_problem(const Scenario& scenario, const ParkingSession& session,
                             HourIndex now, double soe, double kcyc_pct,
                             const HorizonInputs& inputs);

struct HorizonSolution {
    lp::Status status = lp::Status::NumericalError;
    std::vector<HourlyFlows> flows;
    std::vector<double> soe;        ///< end-of-hour SoE
    std::vector<double> kcal;       ///< PWL calendar rate at soe (fraction)
    std::vector<double> kcal_model; ///< calendar rate carried by the MILP columns
    std::vector<double> dq_cal_pct;
    std::vector<double> dq_cyc_pct;
    double objective = 0.0;         ///< solver objective, offset included
    double tie_break = 0.0;         ///< part of `objective` due to tie-break terms
    bool relaxed = false;           ///< SoE floors relaxed to the reachable path
    std::vector<int> churn_hours;   ///< hours with simultaneous charge and discharge
    std::vector<std::string> infeasible_families;
    std::int64_t iterations = 0;
    std::int64_t nodes = 0;

    bool ok() const { return status == lp::Status::Optimal && !flows.empty(); }
};

/// Columns carrying the linearised calendar term.
struct DegradationColumns {
    std::vector<std::vector<int>> delta;  ///< per hour, one fill column per PWL segment
    std::vector<int> below;               ///< per hour, SoE below the PWL domain (-1 if absent)
    std::vector<int> binaries;            ///< segment selectors at concave kinks
    std::vector<double> slopes;
    double base_rate = 0.0;               ///< calendar rate at the domain lower end
};

/// Ties a calendar-rate expression to every SoE column through the PWL graph:
/// soe = lo + sum(delta) - below, one selector per concave kink in exact mode.
/// Adds the weighted calendar cost to the model objective.
DegradationColumns linearize_degradation_terms(const HorizonProblem& problem, lp::Model& model,
                                               std::span<const int> soe_cols, double weight);

/// Builds the MILP for a problem. Exposed for tests and benchmarks.
struct EncodedProblem {
    lp::Model model;
    std::vector<int> col_g2v, col_pv2v, col_v2g, col_v2h, col_pv2h, col_pv2g, col_soe;
    DegradationColumns degradation;
    bool has_degradation_columns = false;
};

/// Encodes the degradation terms and all constraints. Throws ConfigError when
/// the SoE bounds leave the PWL domain.
EncodedProblem encode(const HorizonProblem& problem);

HorizonSolution solve(const HorizonProblem& problem, const lp::Solver& solver,
                      const lp::Options& options = {});

/// Solves; on infeasibility relaxes the SoE floors to the maximum reachable
/// trajectory ("charge as fast as possible") and solves again.
HorizonSolution solve_with_fallback(const HorizonProblem& problem, const lp::Solver& solver,
                                    const lp::Options& options = {});

/// Strategy objective recomputed from the flows and SoE of a solution, using
/// the exact PWL calendar rate. Excludes tie-break terms.
double recompute_objective(const HorizonProblem& problem, const HorizonSolution& solution);

/// Largest violation of the flow, SoE and balance constraints.
double max_constraint_violation(const HorizonProblem& problem, const HorizonSolution& solution);

/// Writes a JSON dump of one solved horizon.
void write_debug_dump(const std::string& path, const HorizonProblem& problem,
                      const HorizonSolution& solution);

}  // namespace agemp::scheduler
