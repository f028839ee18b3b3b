#pragma once

/**
 * @file domain.hpp
 * @brief Configuration and state value types shared by every agemp module.
 *
 * Energies are kWh per hourly step, money is euros (double, never rounded
 * internally), SoE is a fraction of usable capacity and capacity loss is in
 * percent. Time is a zero-based global hour index over the simulated year.
 */

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace agemp {

using HourIndex = std::int64_t;

inline constexpr int kHoursPerDay = 24;
inline constexpr int kHoursPerYear = 8760;

/// Thrown when a configuration value violates a documented invariant.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Thrown for configurations the engine recognises but cannot evaluate
/// (e.g. the nonlinear calendar model without an anode OCP curve).
class UnsupportedConfiguration : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct EvSpec {
    double usable_capacity_kwh = 79.0;
    double efficiency_km_per_kwh = 5.9;
    double max_hourly_energy_kwh = 11.0;
    double pickup_soe = 0.8;
    double soe_min = 0.1;
    double soe_max = 0.9;
    double safety_soe = 0.4;
    double initial_soe = 0.6;

    void validate() const;
};

struct PvSpec {
    bool enabled = true;
    double installed_capacity_kwh = 10.0;
    double max_hourly_output_kwh = 11.0;
    double annualized_cost_eur_per_kwh_year = 85.0;

    /// Installed capacity seen by the plant; zero when PV is disabled.
    double effective_capacity_kwh() const { return enabled ? installed_capacity_kwh : 0.0; }
    double annual_cost_eur() const {
        return effective_capacity_kwh() * annualized_cost_eur_per_kwh_year;
    }
    void validate() const;
};

struct Tariff {
    double vat_rate = 0.25;
    double variable_fee = 0.00363;
    double delivery_fee = 0.00627;
    double network_fee = 0.0399;
    double monthly_tax = 4.09;
    double v2g_price_ratio = 1.0;

    void validate() const;
};

struct BatteryEconomics {
    int nominal_life_years = 10;
    double replacement_cost_eur_per_kwh = 52.46;
    double residual_fraction = 0.2;
    double discount_rate = 0.04;
    double eol_capacity_pct = 80.0;

    void validate() const;
};

/// Nonlinear (Arrhenius / anode-potential) calendar rate configuration.
struct NonlinearCalendarConfig {
    double k_cal_ref = 0.0;
    double activation_energy = 0.0;  ///< J/mol
    double alpha = 0.0;
    double anode_ocp_ref = 0.0;      ///< V
    /// Anode open-circuit potential U_a(SoE) as (soe, volts) samples,
    /// linearly interpolated. Empty means "not supplied".
    std::vector<double> ocp_soe;
    std::vector<double> ocp_volts;
};

struct DegradationParams {
    // Piecewise-linear calendar rate (fraction per sqrt(hour)).
    double pwl_intercept = -6.491e-6;
    double pwl_first_slope = 7.613e-5;
    std::vector<double> pwl_breakpoints{0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
    std::vector<double> pwl_slope_changes{1.362e-4, 1.087e-4, -1.317e-4, -3.668e-5,
                                          3.324e-4, 5.757e-4, -3.912e-4};
    /// PWL validity domain; matches the admissible SoE window.
    double pwl_domain_lo = 0.1;
    double pwl_domain_hi = 0.9;

    // Cycle rate (fraction per equivalent full cycle). Placeholder physics:
    // k_a + k_b = 1 and k_h = 1 so that cycle_rate(DoD = 1, T = T_ref) = k_cyc_ref.
    double k_cyc_ref = 1.0e-4;
    double k_a = 0.5;
    double k_b = 0.5;
    double k_g = 0.0;
    double k_h = 1.0;

    double temperature_kelvin = 298.15;
    double temperature_ref_kelvin = 298.15;

    /// Rates are fractional capacity loss; this converts them to percent.
    double rate_to_pct = 100.0;

    std::optional<NonlinearCalendarConfig> nonlinear;

    static constexpr double kGasConstant = 8.314462618;   // J/(mol K)
    static constexpr double kFaradayConstant = 96485.33212;  // C/mol

    void validate() const;
};

/// One hour of energy flows, all in kWh.
struct HourlyFlows {
    double v2g = 0.0;
    double v2h = 0.0;
    double g2v = 0.0;
    double g2h = 0.0;
    double pv2v = 0.0;
    double pv2g = 0.0;
    double pv2h = 0.0;
    double pv2curt = 0.0;

    double ev_charge() const { return g2v + pv2v; }
    double ev_discharge() const { return v2g + v2h; }
    double grid_import() const { return g2v + g2h; }
    double pv_used() const { return pv2g + pv2h + pv2v; }
};

struct ParkingSession {
    HourIndex arrival_hour = 0;
    HourIndex declared_pickup_hour = 0;
    HourIndex actual_pickup_hour = 0;

    /// T_p = t_p - t_a + 1, both endpoints included.
    HourIndex duration() const { return declared_pickup_hour - arrival_hour + 1; }
    bool perturbed() const { return actual_pickup_hour != declared_pickup_hour; }
};

struct DegradationState {
    double q_loss_cal_pct = 0.0;
    double q_loss_cyc_pct = 0.0;
    double efc = 0.0;
    HourIndex hours_elapsed = 0;

    double q_loss_pct() const { return q_loss_cal_pct + q_loss_cyc_pct; }
};

enum class Mode { Parked, Driving, Idle };

std::string_view to_string(Mode m);

struct LedgerEntry {
    HourIndex hour = 0;
    Mode mode = Mode::Parked;
    double ec_eur = 0.0;
    double er_eur = 0.0;
    double bc_eur = 0.0;
};

/// Battery net present value for a pack of `capacity_kwh`.
/// Throws std::invalid_argument for nonpositive capacity.
double compute_net_present_value(const BatteryEconomics& econ, double capacity_kwh);

/// Retail purchase price including fees and VAT. The fixed monthly tax is
/// not part of the per-kWh price.
double retail_price(double spot_eur_per_kwh, const Tariff& tariff);

/// Monetised capacity loss: nv * delta / (100 - EoL).
double battery_cost(double delta_q_loss_pct, double nv_eur, double eol_pct);

}  // namespace agemp
