#include "agemp/domain.hpp"

#include <cmath>

namespace agemp {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
}

}  // namespace

void EvSpec::validate() const {
    require(usable_capacity_kwh > 0.0, "ev.usable_capacity_kwh must be > 0");
    require(max_hourly_energy_kwh > 0.0, "ev.max_hourly_energy_kwh must be > 0");
    require(efficiency_km_per_kwh > 0.0, "ev.efficiency_km_per_kwh must be > 0");
    require(0.0 <= soe_min && soe_min < safety_soe && safety_soe < pickup_soe &&
                pickup_soe <= soe_max && soe_max <= 1.0,
            "ev: require 0 <= soe_min < safety_soe < pickup_soe <= soe_max <= 1");
    require(initial_soe >= soe_min && initial_soe <= soe_max,
            "ev.initial_soe must lie within [soe_min, soe_max]");
}

void PvSpec::validate() const {
    require(installed_capacity_kwh >= 0.0, "pv.installed_capacity_kwh must be >= 0");
    require(max_hourly_output_kwh >= 0.0, "pv.max_hourly_output_kwh must be >= 0");
    require(annualized_cost_eur_per_kwh_year >= 0.0,
            "pv.annualized_cost_eur_per_kwh_year must be >= 0");
}

void Tariff::validate() const {
    require(v2g_price_ratio >= 0.0 && v2g_price_ratio <= 1.0,
            "tariff.v2g_price_ratio must lie in [0, 1]");
    require(vat_rate >= 0.0 && variable_fee >= 0.0 && delivery_fee >= 0.0 &&
                network_fee >= 0.0 && monthly_tax >= 0.0,
            "tariff: fees and taxes must be >= 0");
}

void BatteryEconomics::validate() const {
    require(eol_capacity_pct > 0.0 && eol_capacity_pct < 100.0,
            "battery_economics.eol_capacity_pct must lie in (0, 100)");
    require(residual_fraction >= 0.0 && residual_fraction < 1.0,
            "battery_economics.residual_fraction must lie in [0, 1)");
    require(discount_rate > -1.0, "battery_economics.discount_rate must be > -1");
    require(nominal_life_years >= 0, "battery_economics.nominal_life_years must be >= 0");
}

void DegradationParams::validate() const {
    require(pwl_breakpoints.size() == pwl_slope_changes.size(),
            "degradation: breakpoints and slope_changes differ in length");
    require(pwl_domain_lo < pwl_domain_hi, "degradation: empty PWL domain");
    double prev = pwl_domain_lo;
    for (double tau : pwl_breakpoints) {
        require(tau > prev, "degradation: breakpoints must be strictly increasing inside the domain");
        prev = tau;
    }
    require(pwl_breakpoints.empty() || pwl_breakpoints.back() < pwl_domain_hi,
            "degradation: last breakpoint must lie below the domain upper end");
    require(k_cyc_ref >= 0.0, "degradation.k_cyc_ref must be >= 0");
    require(temperature_kelvin > 0.0 && temperature_ref_kelvin > 0.0,
            "degradation: temperatures must be positive kelvin");
    require(rate_to_pct > 0.0, "degradation.rate_to_pct must be > 0");
    if (nonlinear) {
        require(nonlinear->ocp_soe.size() == nonlinear->ocp_volts.size(),
                "degradation.nonlinear: OCP curve columns differ in length");
    }
}

std::string_view to_string(Mode m) {
    switch (m) {
        case Mode::Parked: return "parked";
        case Mode::Driving: return "driving";
        case Mode::Idle: return "idle";
    }
    return "unknown";
}

double compute_net_present_value(const BatteryEconomics& econ, double capacity_kwh) {
    if (!(capacity_kwh > 0.0)) {
        throw std::invalid_argument("compute_net_present_value: capacity must be > 0");
    }
    const double rep = econ.replacement_cost_eur_per_kwh;
    const double residual = econ.residual_fraction * rep;
    const double discount = std::pow(1.0 + econ.discount_rate, econ.nominal_life_years);
    return capacity_kwh * (rep - residual) / discount;
}

double retail_price(double spot_eur_per_kwh, const Tariff& tariff) {
    if (!std::isfinite(spot_eur_per_kwh)) {
        throw std::invalid_argument("retail_price: spot price is not finite");
    }
    return (1.0 + tariff.vat_rate) *
           (spot_eur_per_kwh + tariff.variable_fee + tariff.delivery_fee + tariff.network_fee);
}

double battery_cost(double delta_q_loss_pct, double nv_eur, double eol_pct) {
    if (eol_pct >= 100.0) {
        throw std::invalid_argument("battery_cost: EoL must be below 100%");
    }
    if (delta_q_loss_pct < 0.0) {
        throw std::invalid_argument("battery_cost: capacity loss increment must be >= 0");
    }
    return nv_eur * delta_q_loss_pct / (100.0 - eol_pct);
}

}  // namespace agemp
