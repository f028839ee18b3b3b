#pragma once

#include <functional>
#include <span>
#include <vector>

#include "agemp/domain.hpp"

namespace agemp::degradation {

/// Calendar-rate PWL: b0 + m0*soe + sum_i dm_i * max(0, soe - tau_i).
struct PwlCalendarModel {
    double intercept = 0.0;
    double first_slope = 0.0;
    std::vector<double> breakpoints;    // interior tau_1..tau_{M-1}
    std::vector<double> slope_changes;  // dm_1..dm_{M-1}
    double domain_lo = 0.1;
    double domain_hi = 0.9;

    static PwlCalendarModel from_params(const DegradationParams& p);

    /// Segment edges [lo, tau_1, ..., tau_{M-1}, hi].
    std::vector<double> knots() const;
    /// Slope of each of the M segments.
    std::vector<double> segment_slopes() const;
};

struct CycleRateModel {
    double k_cyc_ref = 0.0;
    double k_a = 0.0;
    double k_b = 0.0;
    double k_g = 0.0;
    double k_h = 0.0;
    double temperature_kelvin = 298.15;
    double temperature_ref_kelvin = 298.15;

    static CycleRateModel from_params(const DegradationParams& p);
};

/// Throws std::domain_error when soe lies outside the model domain.
double eval_pwl_kcal(double soe, const PwlCalendarModel& model);

/// Arrhenius / anode-potential calendar rate. Throws UnsupportedConfiguration
/// when no OCP curve is configured.
double eval_nonlinear_kcal(double soe, const DegradationParams& params);

/// Linear interpolation of the configured anode OCP curve (clamped at the ends).
double anode_ocp(double soe, const NonlinearCalendarConfig& cfg);

/// Secant PWL through kcal_fn at `knots` (domain ends included). Throws
/// std::invalid_argument for fewer than two knots or non-increasing knots.
PwlCalendarModel fit_pwl(const std::function<double(double)>& kcal_fn,
                         std::span<const double> knots);

/// PWL used inside the optimiser: the configured coefficients, or a secant fit
/// of the nonlinear model at the configured knots when an OCP curve is given.
PwlCalendarModel optimizer_pwl(const DegradationParams& params);

/// Root-mean-square difference between model and fn on a uniform grid.
double pwl_rmse(const PwlCalendarModel& model, const std::function<double(double)>& fn,
                double step = 1e-3);

/// K_cyc(DoD, T) in the same fractional units as k_cyc_ref.
double cycle_rate(double dod, const CycleRateModel& model);

/// Hourly calendar weight 1 / (2 sqrt(t + 1)) for global hour t.
double calendar_weight(HourIndex global_hour);

/// Calendar increment kcal / (2 sqrt(t + 1)); kcal already in the output unit.
double incremental_calendar(double kcal, HourIndex global_hour);

struct CycleIncrement {
    double loss = 0.0;
    double efc = 0.0;
};

/// Cycle increment for one SoE step; loss uses cycle_rate(dod).
CycleIncrement incremental_cycle(double delta_soe, double dod, const CycleRateModel& model);

/// Componentwise addition; throws std::invalid_argument for negative increments.
DegradationState accumulate(const DegradationState& state, double cal_inc, double cyc_inc,
                            double efc_inc);

/// Plant-side accountant: evaluates calendar and cycle increments in percent
/// using either the PWL or the nonlinear calendar model.
class PlantModel {
public:
    explicit PlantModel(const DegradationParams& params);

    /// Calendar rate in percent per sqrt(hour) at soe (clamped to the domain).
    double kcal_pct(double soe) const;
    double kcyc_pct(double dod) const;
    const PwlCalendarModel& pwl() const { return pwl_; }
    const CycleRateModel& cycle() const { return cycle_; }
    bool uses_nonlinear() const { return nonlinear_; }

private:
    DegradationParams params_;
    PwlCalendarModel pwl_;
    CycleRateModel cycle_;
    bool nonlinear_ = false;
};

}  // namespace agemp::degradation
