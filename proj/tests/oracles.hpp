#pragma once

// Test-side reference computations. Nothing here calls into agemp except to
// read problem data, so results can be compared against the library.

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "agemp/scheduler.hpp"

namespace oracle {

/// Discounted replacement cost net of residual value, per kWh.
inline double nv_per_kwh(double replacement, double residual_frac, double rate, int years) {
    return (replacement - residual_frac * replacement) / std::pow(1.0 + rate, years);
}

/// Calendar-rate PWL with the published coefficients, written out longhand.
inline double table_pwl(double soe) {
    const double tau[7] = {0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
    const double dm[7] = {1.362e-4, 1.087e-4, -1.317e-4, -3.668e-5, 3.324e-4, 5.757e-4, -3.912e-4};
    double k = -6.491e-6 + 7.613e-5 * soe;
    for (int i = 0; i < 7; ++i) k += dm[i] * std::max(0.0, soe - tau[i]);
    return k;
}

/// Largest absolute segment slope of the table PWL.
inline double table_pwl_max_slope() {
    const double dm[7] = {1.362e-4, 1.087e-4, -1.317e-4, -3.668e-5, 3.324e-4, 5.757e-4, -3.912e-4};
    double slope = 7.613e-5, worst = std::abs(slope);
    for (double d : dm) worst = std::max(worst, std::abs(slope += d));
    return worst;
}

inline double phi(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::acos(-1.0)); }
inline double Phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Mean of N(mu, sigma) truncated to [lo, hi].
inline double truncated_normal_mean(double mu, double sigma, double lo, double hi) {
    const double a = (lo - mu) / sigma, b = (hi - mu) / sigma;
    return mu + sigma * (phi(a) - phi(b)) / (Phi(b) - Phi(a));
}

inline double retail(double spot) { return 1.25 * (spot + 0.00363 + 0.00627 + 0.0399); }

/// Per-hour weights of the toy objective.
struct Weights {
    double energy = 1.0;
    double degradation = 1.0;
    bool discharge = true;
};

inline Weights weights_for(agemp::Strategy s) {
    switch (s) {
        case agemp::Strategy::Proposed: return {1.0, 1.0, true};
        case agemp::Strategy::Unidirectional: return {1.0, 1.0, false};
        case agemp::Strategy::EnergyOnly: return {1.0, 0.0, true};
        case agemp::Strategy::DegradationOnly: return {0.0, 1.0, true};
    }
    return {};
}

/// Objective of one hour given flows and the SoE before/after, using the
/// paper's cost terms: EC - ER plus NV-priced calendar and cycle loss.
struct HourCost {
    double retail, spot, gamma, weight_cal, kcyc_pct, cost_per_pct, cap;
    Weights w;

    double operator()(double g2v, double g2h, double v2g, double pv2g, double soe_before, double soe_after) const {
        const double energy = (g2v + g2h) * retail - (gamma * v2g + pv2g) * spot;
        const double cal = 100.0 * table_pwl(soe_after) * weight_cal;
        const double cyc = kcyc_pct * std::abs(soe_after - soe_before) / 2.0;
        return w.energy * energy + w.degradation * cost_per_pct * (cal + cyc);
    }
};

inline std::vector<HourCost> hour_costs(const agemp::scheduler::HorizonProblem& p) {
    std::vector<HourCost> out;
    const Weights w = weights_for(p.strategy);
    for (int k = 0; k < p.horizon(); ++k) {
        const double t = static_cast<double>(p.current_hour + k);
        out.push_back({retail(p.spot_price[k]), p.spot_price[k], p.gamma, 1.0 / (2.0 * std::sqrt(t + 1.0)),
                       p.kcyc_pct, p.nv_eur / (100.0 - p.eol_pct), p.capacity_kwh, w});
    }
    return out;
}

/// Evaluates a flow trajectory with the oracle objective.
inline double evaluate(const agemp::scheduler::HorizonProblem& p, const agemp::scheduler::HorizonSolution& s) {
    const auto costs = hour_costs(p);
    double prev = p.initial_soe, total = 0.0;
    for (int k = 0; k < p.horizon(); ++k) {
        const auto& f = s.flows[k];
        total += costs[k](f.g2v, f.g2h, f.v2g, f.pv2g, prev, s.soe[k]);
        prev = s.soe[k];
    }
    return total;
}

/// Exhaustive search over every flow combination on a `step` kWh grid,
/// memoised over the (grid-valued) SoE. Returns +inf when infeasible.
inline double brute_force(const agemp::scheduler::HorizonProblem& p, double step = 0.5) {
    const auto costs = hour_costs(p);
    const Weights w = weights_for(p.strategy);
    const int units = static_cast<int>(std::lround(p.capacity_kwh / step));
    const double inf = std::numeric_limits<double>::infinity();
    const int start = static_cast<int>(std::lround(p.initial_soe * p.capacity_kwh / step));
    std::vector<double> best(units + 1, inf);
    best[start] = 0.0;
    const auto grid_max = [&](double v) { return static_cast<int>(std::floor(v / step + 1e-9)); };
    const double tol = 1e-9;

    for (int k = 0; k < p.horizon(); ++k) {
        std::vector<double> next(units + 1, inf);
        const int emax = grid_max(p.ev_max_kwh);
        const int pv = grid_max(p.pv_production[k]);
        const int pvmax = std::min(pv, grid_max(p.pv_max_kwh));
        const int hl = grid_max(p.household_load[k]);
        const double load = p.household_load[k];
        for (int s = 0; s <= units; ++s) {
            if (best[s] == inf) continue;
            for (int g2v = 0; g2v <= emax; ++g2v)
            for (int pv2v = 0; g2v + pv2v <= emax && pv2v <= pvmax; ++pv2v)
            for (int v2g = 0; v2g <= (w.discharge ? emax : 0); ++v2g)
            for (int v2h = 0; v2g + v2h <= (w.discharge ? emax : 0) && v2h <= hl; ++v2h)
            for (int pv2h = 0; v2h + pv2h <= hl && pv2v + pv2h <= pvmax; ++pv2h)
            for (int pv2g = 0; pv2v + pv2h + pv2g <= pvmax; ++pv2g) {
                const double g2h = load - (v2h + pv2h) * step;
                if (g2h < -tol) continue;
                if ((g2v * step + g2h) > p.grid_cap[k] + tol) continue;
                const int s2 = s + g2v + pv2v - v2g - v2h;
                if (s2 < 0 || s2 > units) continue;
                const double soe_before = s * step / p.capacity_kwh;
                const double soe_after = s2 * step / p.capacity_kwh;
                if (soe_after < p.soe_lower[k] - tol || soe_after > p.soe_upper[k] + tol) continue;
                const double c = best[s] + costs[k](g2v * step, g2h, v2g * step, pv2g * step, soe_before, soe_after);
                next[s2] = std::min(next[s2], c);
            }
        }
        best.swap(next);
    }
    return *std::min_element(best.begin(), best.end());
}

/// Randomised toy horizon whose data sit on the 0.5 kWh grid.
inline agemp::scheduler::HorizonProblem make_toy(std::mt19937_64& rng, agemp::Strategy strategy) {
    std::uniform_int_distribution<int> hours(3, 4), quarter(0, 3), start_hour(0, 8000);
    std::uniform_real_distribution<double> price(0.0, 0.4), unit(0.0, 1.0);
    agemp::Scenario s;
    s.strategy = strategy;
    s.ev.usable_capacity_kwh = 10.0;
    s.ev.max_hourly_energy_kwh = 1.5;
    s.pv.max_hourly_output_kwh = unit(rng) < 0.3 ? 1.0 : 11.0;
    s.grid_cap_kwh = unit(rng) < 0.3 ? 2.0 : 1e6;
    const int h = hours(rng);
    const agemp::HourIndex now = start_hour(rng);
    agemp::ParkingSession session{now, now + h - 1, now + h - 1};
    const double soe0 = 0.5 + 0.05 * std::uniform_int_distribution<int>(0, 6)(rng);
    agemp::scheduler::HorizonInputs in;
    for (int k = 0; k < h; ++k) {
        in.spot_price.push_back(price(rng));
        in.household_load.push_back(0.5 * quarter(rng));
        in.pv_production.push_back(0.5 * quarter(rng));
    }
    const double dod = unit(rng);
    const double kcyc_pct = 100.0 * 1e-4 * (0.5 * dod + 0.5);
    return agemp::scheduler::build_problem(s, session, now, soe0, kcyc_pct, in);
}

/// Cost of moving one grid step of energy in any single hour of the horizon:
/// the largest per-kWh energy price plus the largest per-kWh degradation price.
inline double step_cost(const agemp::scheduler::HorizonProblem& p, double step = 0.5) {
    const auto costs = hour_costs(p);
    double worst = 0.0;
    for (const auto& c : costs) {
        const double slope = table_pwl_max_slope();
        const double deg = c.cost_per_pct * (100.0 * slope * c.weight_cal * p.horizon() + c.kcyc_pct / 2.0) / c.cap;
        worst = std::max(worst, c.w.energy * std::max(c.retail, c.spot) + c.w.degradation * deg);
    }
    return step * worst;
}

}  // namespace oracle
