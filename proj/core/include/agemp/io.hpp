#pragma once

/**
 * @file io.hpp
 * @brief Scenario files, hourly series CSVs, synthetic data, result and
 * ledger tables, ledger replay and plot-ready report tables.
 *
 * Scenario files are JSON with unit-suffixed keys. Bulk data is CSV keyed by
 * a 0-based hour index. Machine-readable tables carry full double precision;
 * report tables round euros to 2 decimals.
 */

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "agemp/degradation.hpp"
#include "agemp/scenario.hpp"
#include "agemp/simulator.hpp"

namespace agemp::io {

enum class SeriesKind { SpotPrice, HouseholdLoad, Irradiance };

/// "spot", "load", "irradiance".
SeriesKind parse_series_kind(std::string_view name);
std::string_view to_string(SeriesKind kind);
/// Value column name written by write_series ("spot_eur_per_kwh", ...).
std::string_view value_column(SeriesKind kind);

/// Parse failure. row() is the 1-based data row (header excluded), 0 when
/// the problem is not tied to a row.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& file, std::int64_t row, const std::string& what);
    std::int64_t row() const { return row_; }

private:
    std::int64_t row_;
};

/// Reads an hourly series. The header names either `hour` or `timestamp` as
/// the first column and the value in the last column. With an hour column,
/// indices must run 0, 1, 2, ... without gaps or duplicates. Irradiance must
/// lie in [0, 1], load must be nonnegative. When expected_rows > 0 the row
/// count must match it exactly.
std::vector<double> load_series(const std::filesystem::path& path, SeriesKind kind,
                                std::int64_t expected_rows = 0);

void write_series(const std::filesystem::path& path, SeriesKind kind, const std::vector<double>& values);

/// Deterministic synthetic year. Load averages 21.6 kWh/day; irradiance is a
/// clear-sky profile times a cloud process; spot prices follow a seasonal
/// level with a daily shape and noise, floored at 0.
std::vector<double> generate_synthetic(SeriesKind kind, std::uint64_t seed,
                                       std::int64_t hours = kHoursPerYear);

/// Series named in the scenario, or synthetic ones for empty paths.
sim::YearData load_year_data(const Scenario& scenario);

/// Parses a scenario document. Unknown keys are rejected; missing keys keep
/// their defaults. Relative data paths resolve against `base_dir`.
Scenario scenario_from_json(std::string_view text, const std::filesystem::path& base_dir = {});
std::string scenario_to_json(const Scenario& scenario);

/// Reads, validates and checks that every referenced file exists.
Scenario load_scenario(const std::filesystem::path& path);
void save_scenario(const std::filesystem::path& path, const Scenario& scenario);

/// One row of the result table.
struct ResultRow {
    std::string label;
    std::string strategy;
    double fc_eur = 0.0;
    double ec_minus_er_eur = 0.0;
    double bc_eur = 0.0;
    double q_loss_pct = 0.0;
    double q_cal_pct = 0.0;
    double q_cyc_pct = 0.0;
    double efc = 0.0;
    double fixed_eur = 0.0;
};

inline constexpr std::string_view kResultHeader =
    "label,strategy,fc_eur,ec_minus_er_eur,bc_eur,q_loss_pct,q_cal_pct,q_cyc_pct,efc,fixed_eur";

ResultRow to_row(const sim::SimulationResult& result);
void write_results(const std::filesystem::path& path, const std::vector<ResultRow>& rows);
std::vector<ResultRow> read_results(const std::filesystem::path& path);

inline constexpr std::string_view kLedgerHeader =
    "hour,mode,soe_start,soe_end,spot_eur_per_kwh,retail_eur_per_kwh,load_kwh,pv_kwh,"
    "g2v_kwh,g2h_kwh,v2g_kwh,v2h_kwh,pv2v_kwh,pv2h_kwh,pv2g_kwh,pv2curt_kwh,"
    "dq_cal_pct,dq_cyc_pct,efc,q_loss_pct,soe_floor,relaxed,ec_eur,er_eur,bc_eur,fc_running_eur";

void write_ledger(const std::filesystem::path& path, const std::vector<sim::HourRecord>& records);
std::vector<sim::HourRecord> read_ledger(const std::filesystem::path& path);

void write_violations(const std::filesystem::path& path, const std::vector<sim::Violation>& violations);

struct ReplayTolerances {
    double energy_kwh = 1e-9;
    double soe = 1e-7;
    double money_eur = 1e-9;
    double final_cost_eur = 1e-6;
};

/// Replays a ledger against the scenario: flow bounds, household and PV
/// balances, SoE dynamics and bounds, safety floors, price and cost
/// recomputation, degradation monotonicity and the running FC. When `result`
/// is given, the ledger total plus its fixed charges must equal its FC.
/// Returns one message per failed check (empty when the ledger is clean).
std::vector<std::string> replay_ledger(const Scenario& scenario, const std::vector<sim::HourRecord>& records,
                                       const ResultRow* result = nullptr,
                                       const ReplayTolerances& tol = {});

/// Sampled curve (soe, value) as read by fit-pwl. Rows must have strictly
/// increasing SoE.
struct Curve {
    std::vector<double> soe;
    std::vector<double> value;

    /// Linear interpolation; throws std::domain_error outside the sampled range.
    double operator()(double x) const;
};

Curve load_curve(const std::filesystem::path& path);

inline constexpr std::string_view kPwlHeader = "name,tau,value";

/// PWL coefficients in the layout b0, m0, then one dm row per breakpoint.
void write_pwl(std::ostream& out, const degradation::PwlCalendarModel& model);
void write_pwl(const std::filesystem::path& path, const degradation::PwlCalendarModel& model);
degradation::PwlCalendarModel read_pwl(const std::filesystem::path& path);

/// Long-format sweep table, one row per run.
struct SweepRun {
    std::string axis;
    double value = 0.0;
    std::string by_axis;  ///< secondary axis name, "none" when absent
    double by_value = 0.0;
    std::uint64_t seed = 0;
    ResultRow result;
    double v2g_kwh = 0.0;
    double v2h_kwh = 0.0;
    std::int64_t relaxed_solves = 0;
};

void write_sweep_runs(const std::filesystem::path& path, const std::vector<SweepRun>& runs);
std::vector<SweepRun> read_sweep_runs(const std::filesystem::path& path);

/// Wide table: one row per (by_value, value, seed) with per-strategy FC and
/// Q_loss, plus economic gain and additional degradation when the proposed
/// and unidirectional runs are both present.
void write_sweep_summary(const std::filesystem::path& path, const std::vector<SweepRun>& runs);

/// Plot-ready tables averaged over seeds, one file per axis present in
/// `runs`; returns the files written.
std::vector<std::filesystem::path> write_report(const std::vector<SweepRun>& runs,
                                                const std::filesystem::path& out_dir);

}  // namespace agemp::io
