#include "agemp/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace agemp::scheduler {

namespace {

constexpr double kChurnTolerance = 1e-6;
/// Solver values below this are read back as exact zeros (kWh).
constexpr double kFlowZero = 1e-10;

double pv_available(const HorizonProblem& p, int k) {
    return std::max(0.0, std::min(p.pv_production[k], p.pv_max_kwh));
}

double cost_per_pct(const HorizonProblem& p) { return p.nv_eur / (100.0 - p.eol_pct); }

struct SoeRange {
    std::vector<double> lo, hi;
};

// Per-hour SoE interval reachable from the initial SoE that still allows
// every later floor to be met. Empty when the bounds are inconsistent.
SoeRange reachable_soe(const HorizonProblem& p) {
    const int h = p.horizon();
    std::vector<double> up(h), down(h);
    const bool bidirectional = p.strategy != Strategy::Unidirectional;
    for (int k = 0; k < h; ++k) {
        const double grid = std::max(0.0, p.grid_cap[k] - std::max(0.0, p.household_load[k]));
        up[k] = std::min(p.ev_max_kwh, grid + pv_available(p, k)) / p.capacity_kwh;
        down[k] = bidirectional ? p.ev_max_kwh / p.capacity_kwh : 0.0;
    }
    SoeRange r{std::vector<double>(h), std::vector<double>(h)};
    double lo = p.initial_soe, hi = p.initial_soe;
    for (int k = 0; k < h; ++k) {
        lo = std::max(p.soe_lower[k], lo - down[k]);
        hi = std::min(p.soe_upper[k], hi + up[k]);
        r.lo[k] = lo;
        r.hi[k] = hi;
    }
    for (int k = h - 2; k >= 0; --k) {
        r.lo[k] = std::max(r.lo[k], r.lo[k + 1] - up[k + 1]);
        r.hi[k] = std::min(r.hi[k], r.hi[k + 1] + down[k + 1]);
    }
    for (int k = 0; k < h; ++k) {
        if (r.lo[k] > r.hi[k]) return {};
    }
    return r;
}

// Keeps the flows and SoE of a relaxed point and refills the PWL columns in
// segment order, which makes every selector integral.
bool repair_segments(const HorizonProblem& p, const EncodedProblem& enc,
                     std::span<const double> relaxed, std::vector<double>& candidate) {
    const auto& d = enc.degradation;
    const auto knots = p.pwl.knots();
    candidate.assign(relaxed.begin(), relaxed.end());
    std::size_t next_binary = 0;
    for (int k = 0; k < p.horizon(); ++k) {
        const double soe = candidate[enc.col_soe[k]];
        if (d.below[k] >= 0) candidate[d.below[k]] = std::max(0.0, p.pwl.domain_lo - soe);
        for (std::size_t j = 0; j < d.delta[k].size(); ++j) {
            candidate[d.delta[k][j]] = std::clamp(soe - knots[j], 0.0, knots[j + 1] - knots[j]);
        }
        for (std::size_t j = 1; j + 1 < knots.size() && next_binary < d.binaries.size(); ++j) {
            if (d.slopes[j] < d.slopes[j - 1]) {
                candidate[d.binaries[next_binary++]] = soe >= knots[j] ? 1.0 : 0.0;
            }
        }
    }
    return true;
}

}  // namespace

ObjectiveWeights strategy_objective(Strategy strategy) {
    switch (strategy) {
        case Strategy::Proposed:
        case Strategy::Unidirectional: return {1.0, 1.0, 0.0};
        case Strategy::EnergyOnly: return {1.0, 0.0, kThroughputTieBreak};
        case Strategy::DegradationOnly: return {kEnergyTieBreak, 1.0, 0.0};
    }
    throw std::invalid_argument("strategy_objective: unknown strategy");
}

void HorizonProblem::validate() const {
    if (current_hour < arrival_hour || current_hour > pickup_hour) {
        throw std::invalid_argument("HorizonProblem: current hour outside the parking session");
    }
    const auto h = static_cast<std::size_t>(pickup_hour - current_hour + 1);
    for (const auto* v : {&retail_price, &spot_price, &household_load, &pv_production, &grid_cap,
                          &soe_lower, &soe_upper}) {
        if (v->size() != h) {
            throw std::invalid_argument("HorizonProblem: exogenous vector length != t_p - t + 1");
        }
    }
    if (soe_lower_family.size() != h) {
        throw std::invalid_argument("HorizonProblem: bound family vector has wrong length");
    }
    if (capacity_kwh <= 0.0 || ev_max_kwh < 0.0 || pv_max_kwh < 0.0) {
        throw std::invalid_argument("HorizonProblem: capacities must be positive");
    }
    if (eol_pct >= 100.0) throw std::invalid_argument("HorizonProblem: EoL must be below 100%");
}

HorizonProblem build_problem(const Scenario& scenario, const ParkingSession& session,
                             HourIndex now, double soe, double kcyc_pct,
                             const HorizonInputs& inputs) {
    HorizonProblem p;
    p.current_hour = now;
    p.arrival_hour = session.arrival_hour;
    p.pickup_hour = session.declared_pickup_hour;
    p.initial_soe = soe;
    if (now < p.arrival_hour || now > p.pickup_hour) {
        throw std::invalid_argument("build_problem: EV is not parked at the requested hour");
    }
    const auto h = static_cast<std::size_t>(p.pickup_hour - now + 1);
    if (inputs.spot_price.size() < h || inputs.household_load.size() < h ||
        inputs.pv_production.size() < h) {
        throw std::invalid_argument("build_problem: forecasts do not cover the horizon");
    }
    p.spot_price.assign(inputs.spot_price.begin(), inputs.spot_price.begin() + h);
    p.household_load.assign(inputs.household_load.begin(), inputs.household_load.begin() + h);
    p.pv_production.assign(inputs.pv_production.begin(), inputs.pv_production.begin() + h);
    p.retail_price.resize(h);
    std::transform(p.spot_price.begin(), p.spot_price.end(), p.retail_price.begin(),
                   [&](double s) { return retail_price(s, scenario.tariff); });
    p.grid_cap.assign(h, scenario.grid_cap_kwh);

    const EvSpec& ev = scenario.ev;
    p.soe_lower.resize(h);
    p.soe_upper.assign(h, ev.soe_max);
    p.soe_lower_family.resize(h);
    const HourIndex safety_start = p.safety_start_hour();
    for (std::size_t k = 0; k < h; ++k) {
        const HourIndex t = now + static_cast<HourIndex>(k);
        double lo = ev.soe_min;
        std::string family = "soe_bounds";
        if (t >= safety_start && ev.safety_soe > lo) {
            lo = ev.safety_soe;
            family = "safety_floor";
        }
        if (t == p.pickup_hour && ev.pickup_soe > lo) {
            lo = ev.pickup_soe;
            family = "pickup_soe";
        }
        p.soe_lower[k] = lo;
        p.soe_lower_family[k] = family;
    }

    p.strategy = scenario.strategy;
    p.pwl_mode = scenario.pwl_mode;
    p.gamma = scenario.tariff.v2g_price_ratio;
    p.kcyc_pct = kcyc_pct;
    p.pwl = degradation::optimizer_pwl(scenario.degradation);
    p.rate_to_pct = scenario.degradation.rate_to_pct;
    p.nv_eur = compute_net_present_value(scenario.economics, ev.usable_capacity_kwh);
    p.eol_pct = scenario.economics.eol_capacity_pct;
    p.capacity_kwh = ev.usable_capacity_kwh;
    p.ev_max_kwh = ev.max_hourly_energy_kwh;
    p.pv_max_kwh = scenario.pv.max_hourly_output_kwh;
    return p;
}

DegradationColumns linearize_degradation_terms(const HorizonProblem& p, lp::Model& model,
                                               std::span<const int> soe_cols, double weight) {
    const auto knots = p.pwl.knots();
    DegradationColumns cols;
    cols.slopes = p.pwl.segment_slopes();
    cols.base_rate = degradation::eval_pwl_kcal(p.pwl.domain_lo, p.pwl);
    const auto segments = cols.slopes.size();

    // Convex runs: maximal stretches of non-decreasing slope. Inside a run the
    // LP fills segments in order on its own; a concave kink between two runs
    // needs a selector forcing the earlier run full before the later one opens.
    std::vector<std::size_t> run_start{0};
    for (std::size_t j = 1; j < segments; ++j) {
        if (cols.slopes[j] < cols.slopes[j - 1]) run_start.push_back(j);
    }
    run_start.push_back(segments);
    const bool exact = p.pwl_mode == PwlMode::Exact && run_start.size() > 2;

    const double per_pct = weight * cost_per_pct(p) * p.rate_to_pct;
    double offset = model.objective_offset();
    // Segments and selectors the SoE cannot cross are fixed up front.
    const SoeRange reach = reachable_soe(p);
    const bool fix = !reach.lo.empty();
    for (int k = 0; k < p.horizon(); ++k) {
        const double w = degradation::calendar_weight(p.current_hour + k);
        std::vector<int> delta(segments);
        std::vector<lp::Term> link{{soe_cols[k], 1.0}};
        for (std::size_t j = 0; j < segments; ++j) {
            delta[j] = model.add_variable(0.0, knots[j + 1] - knots[j], per_pct * w * cols.slopes[j],
                                          false, "pwl_segment");
            link.push_back({delta[j], -1.0});
        }
        int below = -1;
        if (p.soe_lower[k] < p.pwl.domain_lo - 1e-12) {
            // Priced above every segment so it only absorbs SoE below the domain.
            const double max_slope = *std::max_element(cols.slopes.begin(), cols.slopes.end());
            below = model.add_variable(0.0, p.pwl.domain_lo - p.soe_lower[k],
                                       2.0 * per_pct * w * std::max(0.0, max_slope) + 1e-9, false,
                                       "pwl_segment");
            link.push_back({below, 1.0});
        }
        model.add_constraint(link, lp::Sense::Equal, p.pwl.domain_lo, "pwl_link");
        offset += per_pct * w * cols.base_rate;

        if (fix && reach.lo[k] >= p.pwl.domain_lo) {
            for (std::size_t j = 0; j < segments; ++j) {
                const double width = knots[j + 1] - knots[j];
                if (reach.lo[k] >= knots[j + 1]) model.set_bounds(delta[j], width, width);
                if (reach.hi[k] <= knots[j]) model.set_bounds(delta[j], 0.0, 0.0);
            }
        }

        if (exact) {
            for (std::size_t r = 0; r + 2 < run_start.size(); ++r) {
                const double boundary = knots[run_start[r + 1]];
                double y_lo = 0.0, y_hi = 1.0;
                if (fix && reach.lo[k] >= boundary) y_lo = 1.0;
                if (fix && reach.hi[k] <= boundary) y_hi = 0.0;
                if (y_lo > y_hi) y_lo = y_hi = 0.0;
                const int y = model.add_variable(y_lo, y_hi, 0.0, true, "pwl_selector");
                cols.binaries.push_back(y);
                std::vector<lp::Term> full{{y, -(knots[run_start[r + 1]] - knots[run_start[r]])}};
                for (std::size_t j = run_start[r]; j < run_start[r + 1]; ++j) full.push_back({delta[j], 1.0});
                model.add_constraint(full, lp::Sense::GreaterEqual, 0.0, "pwl_selector");
                std::vector<lp::Term> open{{y, -(knots[run_start[r + 2]] - knots[run_start[r + 1]])}};
                for (std::size_t j = run_start[r + 1]; j < run_start[r + 2]; ++j) open.push_back({delta[j], 1.0});
                model.add_constraint(open, lp::Sense::LessEqual, 0.0, "pwl_selector");
            }
        }
        cols.delta.push_back(std::move(delta));
        cols.below.push_back(below);
    }
    model.set_objective_offset(offset);
    return cols;
}

EncodedProblem encode(const HorizonProblem& p) {
    p.validate();
    for (int k = 0; k < p.horizon(); ++k) {
        if (p.soe_upper[k] > p.pwl.domain_hi + 1e-12) {
            throw ConfigError("scheduler: SoE upper bound lies outside the PWL domain");
        }
    }
    const ObjectiveWeights w = strategy_objective(p.strategy);
    const bool bidirectional = p.strategy != Strategy::Unidirectional;
    const double cyc = w.degradation * cost_per_pct(p) * p.kcyc_pct / (2.0 * p.capacity_kwh) +
                       w.throughput;
    const double emax = p.ev_max_kwh;
    const int h = p.horizon();

    EncodedProblem enc;
    lp::Model& m = enc.model;
    double offset = 0.0;
    for (int k = 0; k < h; ++k) {
        const double price = p.retail_price[k];
        const double spot = p.spot_price[k];
        const double load = std::max(0.0, p.household_load[k]);
        const double pv = pv_available(p, k);

        const int g2v = m.add_variable(0.0, emax, w.energy * price + cyc, false, "charger_limit");
        const int pv2v = m.add_variable(0.0, std::min(emax, pv), cyc, false, "pv_limit");
        const int v2g = m.add_variable(0.0, bidirectional ? emax : 0.0,
                                       -w.energy * p.gamma * spot + cyc, false, "charger_limit");
        const int v2h = m.add_variable(0.0, bidirectional ? std::min(emax, load) : 0.0,
                                       -w.energy * price + cyc, false, "household_balance");
        const int pv2h = m.add_variable(0.0, std::min(load, pv), -w.energy * price, false, "pv_limit");
        const int pv2g = m.add_variable(0.0, pv, -w.energy * spot, false, "pv_limit");
        const int soe = m.add_variable(p.soe_lower[k], p.soe_upper[k], 0.0, false, p.soe_lower_family[k]);
        offset += w.energy * load * price;  // g2h = load - v2h - pv2h

        if (m.upper(pv2v) > 0.0) {
            m.add_constraint({{g2v, 1.0}, {pv2v, 1.0}}, lp::Sense::LessEqual, emax, "charger_limit");
        }
        if (m.upper(v2g) > 0.0 && m.upper(v2h) > 0.0) {
            m.add_constraint({{v2g, 1.0}, {v2h, 1.0}}, lp::Sense::LessEqual, emax, "charger_limit");
        }
        if (pv > 0.0) {
            m.add_constraint({{pv2v, 1.0}, {pv2h, 1.0}, {pv2g, 1.0}}, lp::Sense::LessEqual, pv, "pv_balance");
        }
        if (m.upper(v2h) > 0.0 && m.upper(pv2h) > 0.0) {
            m.add_constraint({{v2h, 1.0}, {pv2h, 1.0}}, lp::Sense::LessEqual, load, "household_balance");
        }
        if (p.grid_cap[k] - load < emax) {
            m.add_constraint({{g2v, 1.0}, {v2h, -1.0}, {pv2h, -1.0}}, lp::Sense::LessEqual,
                             p.grid_cap[k] - load, "grid_cap");
        }
        const double inv_cap = 1.0 / p.capacity_kwh;
        std::vector<lp::Term> dyn{{soe, 1.0}, {g2v, -inv_cap}, {pv2v, -inv_cap}, {v2g, inv_cap}, {v2h, inv_cap}};
        if (k > 0) dyn.push_back({enc.col_soe.back(), -1.0});
        m.add_constraint(dyn, lp::Sense::Equal, k == 0 ? p.initial_soe : 0.0, "soe_dynamics");

        enc.col_g2v.push_back(g2v);
        enc.col_pv2v.push_back(pv2v);
        enc.col_v2g.push_back(v2g);
        enc.col_v2h.push_back(v2h);
        enc.col_pv2h.push_back(pv2h);
        enc.col_pv2g.push_back(pv2g);
        enc.col_soe.push_back(soe);
    }
    m.set_objective_offset(offset);
    if (w.degradation > 0.0) {
        enc.degradation = linearize_degradation_terms(p, m, enc.col_soe, w.degradation);
        enc.has_degradation_columns = true;
    }
    return enc;
}

HorizonSolution solve(const HorizonProblem& p, const lp::Solver& solver, const lp::Options& options) {
    const EncodedProblem enc = encode(p);
    lp::Options opts = options;
    if (enc.has_degradation_columns && !enc.degradation.binaries.empty() && !opts.heuristic) {
        opts.heuristic = [&](std::span<const double> relaxed, std::vector<double>& candidate) {
            return repair_segments(p, enc, relaxed, candidate);
        };
    }
    const lp::Solution raw = solver.solve(enc.model, opts);

    HorizonSolution sol;
    sol.status = raw.status;
    sol.iterations = raw.iterations;
    sol.nodes = raw.nodes;
    sol.infeasible_families = raw.infeasible_families;
    if (!raw.has_values()) return sol;
    sol.objective = raw.objective;

    const auto& x = raw.values;
    const ObjectiveWeights w = strategy_objective(p.strategy);
    double throughput = 0.0;
    double energy = 0.0;
    for (int k = 0; k < p.horizon(); ++k) {
        HourlyFlows f;
        const auto flow = [&](int col) { return x[col] < kFlowZero ? 0.0 : x[col]; };
        f.g2v = flow(enc.col_g2v[k]);
        f.pv2v = flow(enc.col_pv2v[k]);
        f.v2g = flow(enc.col_v2g[k]);
        f.v2h = flow(enc.col_v2h[k]);
        f.pv2h = flow(enc.col_pv2h[k]);
        f.pv2g = flow(enc.col_pv2g[k]);
        f.g2h = std::max(0.0, p.household_load[k] - f.v2h - f.pv2h);
        f.pv2curt = std::max(0.0, p.pv_production[k] - f.pv_used());
        const double soe = x[enc.col_soe[k]];
        const double soe_clamped = std::clamp(soe, p.pwl.domain_lo, p.pwl.domain_hi);
        const double kcal = degradation::eval_pwl_kcal(soe_clamped, p.pwl);
        double kcal_model = kcal;
        if (enc.has_degradation_columns) {
            const auto& d = enc.degradation;
            kcal_model = d.base_rate;
            for (std::size_t j = 0; j < d.delta[k].size(); ++j) kcal_model += d.slopes[j] * x[d.delta[k][j]];
        }
        const double moved = f.ev_charge() + f.ev_discharge();
        throughput += moved;
        energy += f.grid_import() * p.retail_price[k] - (p.gamma * f.v2g + f.pv2g) * p.spot_price[k];
        if (std::min(f.ev_charge(), f.ev_discharge()) > kChurnTolerance) sol.churn_hours.push_back(k);

        sol.flows.push_back(f);
        sol.soe.push_back(soe);
        sol.kcal.push_back(kcal);
        sol.kcal_model.push_back(kcal_model);
        sol.dq_cal_pct.push_back(p.rate_to_pct * kcal * degradation::calendar_weight(p.current_hour + k));
        sol.dq_cyc_pct.push_back(p.kcyc_pct * moved / (2.0 * p.capacity_kwh));
    }
    sol.tie_break = w.throughput * throughput;
    if (p.strategy == Strategy::DegradationOnly) sol.tie_break += w.energy * energy;
    return sol;
}

HorizonSolution solve_with_fallback(const HorizonProblem& p, const lp::Solver& solver,
                                    const lp::Options& options) {
    HorizonSolution first = solve(p, solver, options);
    if (first.status != lp::Status::Infeasible) return first;

    HorizonProblem relaxed = p;
    double reach = p.initial_soe;
    for (int k = 0; k < p.horizon(); ++k) {
        const double charge_cap =
            std::min(p.ev_max_kwh,
                     std::max(0.0, p.grid_cap[k] - std::max(0.0, p.household_load[k])) + pv_available(p, k));
        reach = std::min(p.soe_upper[k], reach + charge_cap / p.capacity_kwh);
        const double floor = reach - 1e-9;
        if (relaxed.soe_lower[k] > floor) {
            relaxed.soe_lower[k] = std::max(0.0, floor);
            relaxed.soe_lower_family[k] = "relaxed_" + relaxed.soe_lower_family[k];
        }
    }
    HorizonSolution second = solve(relaxed, solver, options);
    second.relaxed = true;
    if (second.infeasible_families.empty()) second.infeasible_families = first.infeasible_families;
    return second;
}

double recompute_objective(const HorizonProblem& p, const HorizonSolution& s) {
    const ObjectiveWeights w = strategy_objective(p.strategy);
    const double energy_weight = p.strategy == Strategy::DegradationOnly ? 0.0 : w.energy;
    const double per_pct = cost_per_pct(p);
    double total = 0.0;
    for (int k = 0; k < p.horizon(); ++k) {
        const HourlyFlows& f = s.flows[k];
        const double ec = (f.g2v + f.g2h) * p.retail_price[k];
        const double er = (p.gamma * f.v2g + f.pv2g) * p.spot_price[k];
        const double soe = std::clamp(s.soe[k], p.pwl.domain_lo, p.pwl.domain_hi);
        const double cal = p.rate_to_pct * degradation::eval_pwl_kcal(soe, p.pwl) *
                           degradation::calendar_weight(p.current_hour + k);
        const double cyc = p.kcyc_pct * (f.ev_charge() + f.ev_discharge()) / (2.0 * p.capacity_kwh);
        total += energy_weight * (ec - er) + w.degradation * per_pct * (cal + cyc);
    }
    return total;
}

double max_constraint_violation(const HorizonProblem& p, const HorizonSolution& s) {
    double worst = 0.0;
    const auto viol = [&](double v) { worst = std::max(worst, v); };
    double prev = p.initial_soe;
    for (int k = 0; k < p.horizon(); ++k) {
        const HourlyFlows& f = s.flows[k];
        for (double v : {f.v2g, f.v2h, f.g2v, f.g2h, f.pv2v, f.pv2g, f.pv2h, f.pv2curt}) viol(-v);
        viol(f.g2v + f.pv2v - p.ev_max_kwh);
        viol(f.v2g + f.v2h - p.ev_max_kwh);
        viol(f.pv2g + f.pv2h + f.pv2v - p.pv_max_kwh);
        viol(std::abs(f.pv_used() + f.pv2curt - p.pv_production[k]));
        viol(std::abs(f.g2h + f.v2h + f.pv2h - p.household_load[k]));
        viol(f.g2v + f.g2h - p.grid_cap[k]);
        const double expected = prev + (f.ev_charge() - f.ev_discharge()) / p.capacity_kwh;
        viol(std::abs(s.soe[k] - expected));
        viol(p.soe_lower[k] - s.soe[k]);
        viol(s.soe[k] - p.soe_upper[k]);
        prev = s.soe[k];
    }
    return worst;
}

void write_debug_dump(const std::string& path, const HorizonProblem& p, const HorizonSolution& s) {
    nlohmann::json j;
    j["current_hour"] = p.current_hour;
    j["arrival_hour"] = p.arrival_hour;
    j["pickup_hour"] = p.pickup_hour;
    j["initial_soe"] = p.initial_soe;
    j["strategy"] = std::string(to_string(p.strategy));
    j["status"] = std::string(lp::to_string(s.status));
    j["objective_eur"] = s.objective;
    j["relaxed"] = s.relaxed;
    j["kcyc_pct"] = p.kcyc_pct;
    nlohmann::json hours = nlohmann::json::array();
    for (std::size_t k = 0; k < s.flows.size(); ++k) {
        const HourlyFlows& f = s.flows[k];
        hours.push_back({{"hour", p.current_hour + static_cast<HourIndex>(k)},
                         {"v2g", f.v2g}, {"v2h", f.v2h}, {"g2v", f.g2v}, {"g2h", f.g2h},
                         {"pv2v", f.pv2v}, {"pv2g", f.pv2g}, {"pv2h", f.pv2h}, {"pv2curt", f.pv2curt},
                         {"soe", s.soe[k]}, {"dq_cal_pct", s.dq_cal_pct[k]},
                         {"dq_cyc_pct", s.dq_cyc_pct[k]}, {"spot", p.spot_price[k]},
                         {"retail", p.retail_price[k]}, {"load", p.household_load[k]},
                         {"pv", p.pv_production[k]}});
    }
    j["hours"] = std::move(hours);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write debug dump " + path);
    out << j.dump(2) << '\n';
}

}  // namespace agemp::scheduler
