#include "agemp/degradation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace agemp::degradation {

PwlCalendarModel PwlCalendarModel::from_params(const DegradationParams& p) {
    PwlCalendarModel m;
    m.intercept = p.pwl_intercept;
    m.first_slope = p.pwl_first_slope;
    m.breakpoints = p.pwl_breakpoints;
    m.slope_changes = p.pwl_slope_changes;
    m.domain_lo = p.pwl_domain_lo;
    m.domain_hi = p.pwl_domain_hi;
    return m;
}

std::vector<double> PwlCalendarModel::knots() const {
    std::vector<double> k;
    k.reserve(breakpoints.size() + 2);
    k.push_back(domain_lo);
    k.insert(k.end(), breakpoints.begin(), breakpoints.end());
    k.push_back(domain_hi);
    return k;
}

std::vector<double> PwlCalendarModel::segment_slopes() const {
    std::vector<double> s;
    s.reserve(breakpoints.size() + 1);
    double slope = first_slope;
    s.push_back(slope);
    for (double dm : slope_changes) {
        slope += dm;
        s.push_back(slope);
    }
    return s;
}

CycleRateModel CycleRateModel::from_params(const DegradationParams& p) {
    return CycleRateModel{p.k_cyc_ref, p.k_a, p.k_b, p.k_g, p.k_h, p.temperature_kelvin,
                          p.temperature_ref_kelvin};
}

double eval_pwl_kcal(double soe, const PwlCalendarModel& model) {
    // Small slack absorbs round-off from SoE dynamics.
    constexpr double kSlack = 1e-9;
    if (!(soe >= model.domain_lo - kSlack && soe <= model.domain_hi + kSlack)) {
        throw std::domain_error("eval_pwl_kcal: soe " + std::to_string(soe) +
                                " outside the PWL domain");
    }
    double k = model.intercept + model.first_slope * soe;
    for (std::size_t i = 0; i < model.breakpoints.size(); ++i) {
        k += model.slope_changes[i] * std::max(0.0, soe - model.breakpoints[i]);
    }
    return k;
}

double anode_ocp(double soe, const NonlinearCalendarConfig& cfg) {
    const auto& xs = cfg.ocp_soe;
    const auto& ys = cfg.ocp_volts;
    if (xs.empty()) throw UnsupportedConfiguration("anode OCP curve not supplied");
    if (soe <= xs.front()) return ys.front();
    if (soe >= xs.back()) return ys.back();
    const auto it = std::upper_bound(xs.begin(), xs.end(), soe);
    const auto hi = static_cast<std::size_t>(it - xs.begin());
    const auto lo = hi - 1;
    const double w = (soe - xs[lo]) / (xs[hi] - xs[lo]);
    return ys[lo] + w * (ys[hi] - ys[lo]);
}

double eval_nonlinear_kcal(double soe, const DegradationParams& params) {
    if (!params.nonlinear || params.nonlinear->ocp_soe.empty()) {
        throw UnsupportedConfiguration(
            "nonlinear calendar model requires an anode OCP curve in the configuration");
    }
    const auto& nl = *params.nonlinear;
    const double r = DegradationParams::kGasConstant;
    const double f = DegradationParams::kFaradayConstant;
    const double t = params.temperature_kelvin;
    const double tref = params.temperature_ref_kelvin;
    const double arrhenius = std::exp(-nl.activation_energy / r * (1.0 / t - 1.0 / tref));
    const double potential =
        std::exp(nl.alpha * f / r * (anode_ocp(soe, nl) / t - nl.anode_ocp_ref / tref));
    return nl.k_cal_ref * arrhenius * potential;
}

PwlCalendarModel fit_pwl(const std::function<double(double)>& kcal_fn,
                         std::span<const double> knots) {
    if (knots.size() < 2) {
        throw std::invalid_argument("fit_pwl: need at least two breakpoints");
    }
    for (std::size_t i = 1; i < knots.size(); ++i) {
        if (!(knots[i] > knots[i - 1])) {
            throw std::invalid_argument("fit_pwl: breakpoints must be strictly increasing");
        }
    }
    std::vector<double> values(knots.size());
    std::transform(knots.begin(), knots.end(), values.begin(), kcal_fn);

    PwlCalendarModel m;
    m.domain_lo = knots.front();
    m.domain_hi = knots.back();
    double prev_slope = (values[1] - values[0]) / (knots[1] - knots[0]);
    m.first_slope = prev_slope;
    m.intercept = values[0] - prev_slope * knots[0];
    for (std::size_t i = 1; i + 1 < knots.size(); ++i) {
        const double slope = (values[i + 1] - values[i]) / (knots[i + 1] - knots[i]);
        m.breakpoints.push_back(knots[i]);
        m.slope_changes.push_back(slope - prev_slope);
        prev_slope = slope;
    }
    return m;
}

PwlCalendarModel optimizer_pwl(const DegradationParams& params) {
    if (!params.nonlinear || params.nonlinear->ocp_soe.empty()) {
        return PwlCalendarModel::from_params(params);
    }
    const auto knots = PwlCalendarModel::from_params(params).knots();
    return fit_pwl([&](double soe) { return eval_nonlinear_kcal(soe, params); }, knots);
}

double pwl_rmse(const PwlCalendarModel& model, const std::function<double(double)>& fn,
                double step) {
    const auto n = static_cast<long>(std::floor((model.domain_hi - model.domain_lo) / step + 0.5));
    double sum = 0.0;
    for (long i = 0; i <= n; ++i) {
        const double soe = std::min(model.domain_lo + static_cast<double>(i) * step, model.domain_hi);
        const double e = eval_pwl_kcal(soe, model) - fn(soe);
        sum += e * e;
    }
    return std::sqrt(sum / static_cast<double>(n + 1));
}

double cycle_rate(double dod, const CycleRateModel& model) {
    const double dt = model.temperature_kelvin - model.temperature_ref_kelvin;
    return model.k_cyc_ref * (model.k_a * dod + model.k_b) * (model.k_g * dt * dt + model.k_h);
}

double calendar_weight(HourIndex global_hour) {
    return 1.0 / (2.0 * std::sqrt(static_cast<double>(global_hour) + 1.0));
}

double incremental_calendar(double kcal, HourIndex global_hour) {
    if (global_hour < 0) throw std::invalid_argument("incremental_calendar: negative hour");
    return kcal * calendar_weight(global_hour);
}

CycleIncrement incremental_cycle(double delta_soe, double dod, const CycleRateModel& model) {
    const double efc = std::abs(delta_soe) / 2.0;
    if (efc == 0.0) return {};
    return {cycle_rate(dod, model) * efc, efc};
}

DegradationState accumulate(const DegradationState& state, double cal_inc, double cyc_inc,
                            double efc_inc) {
    if (cal_inc < 0.0 || cyc_inc < 0.0 || efc_inc < 0.0) {
        throw std::invalid_argument("accumulate: degradation increments must be >= 0");
    }
    DegradationState next = state;
    next.q_loss_cal_pct += cal_inc;
    next.q_loss_cyc_pct += cyc_inc;
    next.efc += efc_inc;
    next.hours_elapsed += 1;
    return next;
}

PlantModel::PlantModel(const DegradationParams& params)
    : params_(params),
      pwl_(PwlCalendarModel::from_params(params)),
      cycle_(CycleRateModel::from_params(params)),
      nonlinear_(params.nonlinear.has_value() && !params.nonlinear->ocp_soe.empty()) {}

double PlantModel::kcal_pct(double soe) const {
    const double s = std::clamp(soe, pwl_.domain_lo, pwl_.domain_hi);
    const double k = nonlinear_ ? eval_nonlinear_kcal(s, params_) : eval_pwl_kcal(s, pwl_);
    return params_.rate_to_pct * std::max(0.0, k);
}

double PlantModel::kcyc_pct(double dod) const {
    return params_.rate_to_pct * cycle_rate(std::clamp(dod, 0.0, 1.0), cycle_);
}

}  // namespace agemp::degradation
