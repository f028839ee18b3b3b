// Acceptance run: one PASS/FAIL line per criterion. Exits nonzero when any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "agemp/degradation.hpp"
#include "agemp/domain.hpp"
#include "agemp/io.hpp"
#include "agemp/scheduler.hpp"
#include "agemp/simulator.hpp"
#include "oracles.hpp"

using namespace agemp;
using Clock = std::chrono::steady_clock;

namespace tol {
constexpr double kNv = 0.01;             // €/kWh
constexpr double kNvSeconds = 1e-3;
constexpr double kPwlRelative = 1e-12;
constexpr double kCalendarRelative = 0.01;
constexpr double kCalendarSeconds = 0.1;
constexpr double kOracleSeconds = 60.0;
constexpr int kToysPerStrategy = 20;
constexpr double kSoe = 1e-7;
constexpr double kLedgerEur = 1e-6;
constexpr double kYearSeconds = 600.0;
constexpr double kMonotoneEur = 1e-6;
constexpr double kMonotonePct = 1e-9;
constexpr int kPickupSeeds = 10;
}  // namespace tol

namespace {

int failures = 0;

void report(int id, const char* name, bool ok, const std::string& detail) {
    std::printf("%s %2d %-24s %s\n", ok ? "PASS" : "FAIL", id, name, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string format(const char* fmt, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, fmt, args...);
    return buf;
}

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void nv_formula() {
    BatteryEconomics econ;
    const auto t0 = Clock::now();
    double nv = 0.0;
    constexpr int reps = 1000;
    for (int i = 0; i < reps; ++i) nv += compute_net_present_value(econ, 1.0);
    nv /= reps;
    const double per_call = seconds_since(t0) / reps;
    const bool ok = std::abs(nv - 28.35) <= tol::kNv && per_call < tol::kNvSeconds;
    report(1, "nv-formula", ok, format("NV %.4f EUR/kWh, %.3g s per call", nv, per_call));
}

void pwl_values() {
    const auto model = degradation::PwlCalendarModel::from_params(DegradationParams{});
    const double soe[3] = {0.1, 0.2, 0.25};
    const double hand[3] = {1.122e-6, 8.735e-6, 1.93515e-5};
    double worst = 0.0;
    for (int i = 0; i < 3; ++i) {
        const double v = degradation::eval_pwl_kcal(soe[i], model);
        worst = std::max(worst, std::abs(v - hand[i]) / hand[i]);
    }
    const auto knots = model.knots();
    const auto refit = degradation::fit_pwl(
        [&](double x) { return degradation::eval_pwl_kcal(x, model); }, knots);
    const auto scale = [](double a) { return std::max(std::abs(a), 1e-6); };
    double drift = std::abs(refit.intercept - model.intercept) / scale(model.intercept);
    drift = std::max(drift, std::abs(refit.first_slope - model.first_slope) / scale(model.first_slope));
    bool same_shape = refit.breakpoints.size() == model.breakpoints.size();
    for (std::size_t i = 0; same_shape && i < model.breakpoints.size(); ++i) {
        drift = std::max(drift, std::abs(refit.breakpoints[i] - model.breakpoints[i]));
        drift = std::max(drift, std::abs(refit.slope_changes[i] - model.slope_changes[i]) /
                                    scale(model.slope_changes[i]));
    }
    const bool ok = worst <= tol::kPwlRelative && same_shape && drift <= 1e-9;
    report(2, "pwl-table-values", ok, format("max rel err %.3g, refit drift %.3g", worst, drift));
}

void calendar_consistency() {
    const auto model = degradation::PwlCalendarModel::from_params(DegradationParams{});
    const auto t0 = Clock::now();
    double worst = 0.0;
    for (double soe : {0.2, 0.5, 0.8}) {
        const double kcal = degradation::eval_pwl_kcal(soe, model);
        double sum = 0.0;
        for (HourIndex t = 0; t < kHoursPerYear; ++t) sum += degradation::incremental_calendar(kcal, t);
        const double closed = kcal * std::sqrt(static_cast<double>(kHoursPerYear));
        worst = std::max(worst, std::abs(sum - closed) / closed);
    }
    const double secs = seconds_since(t0);
    const bool ok = worst <= tol::kCalendarRelative && secs < tol::kCalendarSeconds;
    report(3, "calendar-consistency", ok, format("max rel gap %.4f, %.4f s", worst, secs));
}

void oracle_equivalence() {
    const auto solver = lp::make_default_solver();
    std::mt19937_64 rng(20220601);
    const auto t0 = Clock::now();
    int checked = 0, bad = 0, mismatched_feasibility = 0;
    double worst_excess = 0.0, worst_gap_ratio = 0.0;
    for (Strategy s : {Strategy::Proposed, Strategy::Unidirectional, Strategy::EnergyOnly,
                       Strategy::DegradationOnly}) {
        int feasible = 0;
        for (int attempt = 0; feasible < tol::kToysPerStrategy && attempt < 400; ++attempt) {
            const auto p = oracle::make_toy(rng, s);
            const double brute = oracle::brute_force(p);
            const auto sol = scheduler::solve(p, *solver);
            if (!std::isfinite(brute)) {
                if (sol.ok()) ++mismatched_feasibility;
                continue;
            }
            ++feasible;
            ++checked;
            if (!sol.ok()) {
                ++bad;
                continue;
            }
            const double value = oracle::evaluate(p, sol);
            double slack = 1e-9 + 2e-6 * std::abs(brute);
            if (s == Strategy::DegradationOnly) slack += scheduler::kEnergyTieBreak * 10.0 * p.horizon();
            const double excess = value - brute;
            const double step = oracle::step_cost(p);
            worst_excess = std::max(worst_excess, excess);
            worst_gap_ratio = std::max(worst_gap_ratio, (brute - value) / step);
            if (excess > slack || brute - value > step) ++bad;
        }
        if (feasible < tol::kToysPerStrategy) ++bad;
    }
    const double secs = seconds_since(t0);
    const bool ok = bad == 0 && mismatched_feasibility == 0 && secs < tol::kOracleSeconds;
    report(4, "oracle-equivalence", ok,
           format("%d toys, %d bad, %d feasibility mismatches, max excess %.3g EUR, "
                  "max gap %.3f steps, %.2f s",
                  checked, bad, mismatched_feasibility, worst_excess, worst_gap_ratio, secs));
}

struct YearRuns {
    sim::SimulationResult proposed, unidirectional, energy_only, degradation_only;
};

bool same_records(const sim::SimulationResult& a, const sim::SimulationResult& b) {
    if (a.records.size() != b.records.size() || a.fc_eur != b.fc_eur) return false;
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        const auto& x = a.records[i];
        const auto& y = b.records[i];
        if (x.soe_end != y.soe_end || x.flows.g2v != y.flows.g2v || x.flows.v2g != y.flows.v2g ||
            x.flows.v2h != y.flows.v2h || x.flows.pv2v != y.flows.pv2v || x.q_loss_pct != y.q_loss_pct)
            return false;
    }
    return true;
}

void year_invariants(const Scenario& s, const sim::YearData& data, YearRuns& runs) {
    const auto t0 = Clock::now();
    runs.proposed = sim::run_year(s, data);
    const double secs = seconds_since(t0);
    const auto& r = runs.proposed;

    const io::ResultRow row = io::to_row(r);
    const auto problems = io::replay_ledger(s, r.records, &row);

    int soe_out = 0, floor_miss = 0, pickup_miss = 0;
    for (const auto& h : r.records) {
        if (h.soe_end < s.ev.soe_min - tol::kSoe || h.soe_end > s.ev.soe_max + tol::kSoe) ++soe_out;
    }
    for (const ParkingSession& session : r.sessions) {
        if (session.perturbed()) continue;
        const HourIndex start = session.arrival_hour + session.duration() / 2;
        for (HourIndex t = start; t <= session.declared_pickup_hour && t < s.simulation_hours; ++t) {
            if (r.records[t].soe_end < s.ev.safety_soe - tol::kSoe) ++floor_miss;
        }
        if (session.declared_pickup_hour < s.simulation_hours - 1 &&
            r.records[session.declared_pickup_hour].soe_end < s.ev.pickup_soe - tol::kSoe)
            ++pickup_miss;
    }
    double total = r.fixed_eur;
    for (const auto& h : r.records) total += h.ledger.ec_eur - h.ledger.er_eur + h.ledger.bc_eur;
    const double identity = std::abs(total - r.fc_eur);

    const auto repeat = sim::run_year(s, data);
    const bool deterministic = same_records(r, repeat);

    const bool ok = problems.empty() && r.violations.empty() && soe_out == 0 && floor_miss == 0 &&
                    pickup_miss == 0 && identity <= tol::kLedgerEur && deterministic &&
                    secs < tol::kYearSeconds;
    report(5, "full-year-invariants", ok,
           format("%zu hours, %lld solves, replay problems %zu, violations %zu, SoE out %d, "
                  "floor misses %d, pickup misses %d, FC identity %.2g EUR, deterministic %s, %.1f s",
                  r.records.size(), static_cast<long long>(r.solves), problems.size(), r.violations.size(),
                  soe_out, floor_miss, pickup_miss, identity, deterministic ? "yes" : "no", secs));
}

void strategy_ordering(const Scenario& base, const sim::YearData& data, YearRuns& runs) {
    sim::RunOptions quiet;
    quiet.keep_records = false;
    auto with = [&](Strategy st) {
        Scenario s = base;
        s.strategy = st;
        return sim::run_year(s, data, quiet);
    };
    runs.unidirectional = with(Strategy::Unidirectional);
    runs.energy_only = with(Strategy::EnergyOnly);
    runs.degradation_only = with(Strategy::DegradationOnly);
    const auto& p = runs.proposed;
    const auto& u = runs.unidirectional;
    const auto& e = runs.energy_only;
    const auto& d = runs.degradation_only;
    const bool fc = p.fc_eur <= u.fc_eur && p.fc_eur <= e.fc_eur && p.fc_eur <= d.fc_eur;
    const bool q = e.q_loss_pct >= p.q_loss_pct && p.q_loss_pct >= u.q_loss_pct;
    const bool efc = p.efc >= 5.0 * u.efc;
    report(6, "strategy-ordering", fc && q && efc,
           format("FC p/u/e/d %.1f/%.1f/%.1f/%.1f EUR, Q p/u/e/d %.3f/%.3f/%.3f/%.3f %%, "
                  "EFC p/u %.1f/%.1f",
                  p.fc_eur, u.fc_eur, e.fc_eur, d.fc_eur, p.q_loss_pct, u.q_loss_pct, e.q_loss_pct,
                  d.q_loss_pct, p.efc, u.efc));
}

sim::SweepResult sweep(const Scenario& base, const sim::YearData& data, sim::SweepAxis axis,
                       std::vector<double> values, std::vector<Strategy> strategies,
                       std::vector<std::uint64_t> seeds = {0}) {
    sim::SweepSpec spec;
    spec.axis = axis;
    spec.values = std::move(values);
    spec.strategies = std::move(strategies);
    spec.seeds = std::move(seeds);
    sim::RunOptions quiet;
    quiet.keep_records = false;
    return sim::run_sweep(base, data, spec, quiet);
}

void gamma_sweep(Scenario s, const sim::YearData& data) {
    s.forecast.provider = ForecastKind::PerfectForesight;
    const auto grid = sim::default_grid(sim::SweepAxis::Gamma);
    const auto r = sweep(s, data, sim::SweepAxis::Gamma, grid, {Strategy::Proposed, Strategy::Unidirectional});
    double uni_spread = 0.0, worst_rise = -1e300;
    const double uni0 = r.find(grid.front(), 0, Strategy::Unidirectional)->result.fc_eur;
    std::string curve;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double u = r.find(grid[i], 0, Strategy::Unidirectional)->result.fc_eur;
        const double p = r.find(grid[i], 0, Strategy::Proposed)->result.fc_eur;
        uni_spread = std::max(uni_spread, std::abs(u - uni0));
        if (i > 0) worst_rise = std::max(worst_rise, p - r.find(grid[i - 1], 0, Strategy::Proposed)->result.fc_eur);
        curve += format("%s%.1f", i ? "/" : "", p);
    }
    const double v2g0 = r.find(0.0, 0, Strategy::Proposed)->result.v2g_kwh;
    const bool ok = uni_spread <= tol::kMonotoneEur && worst_rise <= tol::kMonotoneEur && v2g0 == 0.0;
    report(7, "gamma-sweep", ok,
           format("uni FC spread %.3g EUR, max proposed rise %.3g EUR, V2G at gamma 0 %.3g kWh, "
                  "proposed FC %s",
                  uni_spread, worst_rise, v2g0, curve.c_str()));
}

void battery_sweep(Scenario s, const sim::YearData& data) {
    s.forecast.provider = ForecastKind::PerfectForesight;
    const auto grid = sim::default_grid(sim::SweepAxis::Battery);
    const auto r = sweep(s, data, sim::SweepAxis::Battery, grid, {Strategy::Proposed, Strategy::Unidirectional});
    bool ok = true;
    std::string gains, extra;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double g = r.economic_gain(grid[i], 0), d = r.additional_degradation(grid[i], 0);
        if (i > 0) {
            ok = ok && g >= r.economic_gain(grid[i - 1], 0) - tol::kMonotoneEur;
            ok = ok && d <= r.additional_degradation(grid[i - 1], 0) + tol::kMonotonePct;
        }
        gains += format("%s%.1f", i ? "/" : "", g);
        extra += format("%s%.4f", i ? "/" : "", d);
    }
    report(8, "battery-sweep", ok, format("gain %s EUR, extra Q %s %%", gains.c_str(), extra.c_str()));
}

void pv_sweep(const Scenario& base, const sim::YearData& data) {
    Scenario vhg = base;
    vhg.pv.enabled = false;
    sim::RunOptions quiet;
    quiet.keep_records = false;
    const double fc_vhg = sim::run_year(vhg, data, quiet).fc_eur;

    std::vector<double> grid;
    for (int kw = 0; kw <= 50; kw += 5) grid.push_back(kw);
    const auto r = sweep(base, data, sim::SweepAxis::PvSize, grid, {Strategy::Proposed});
    std::vector<double> fc;
    for (double v : grid) fc.push_back(r.find(v, 0, Strategy::Proposed)->result.fc_eur);
    const bool exact = fc.front() == fc_vhg;
    const auto best = static_cast<std::size_t>(std::min_element(fc.begin(), fc.end()) - fc.begin());
    bool unimodal = best > 0 && best + 1 < fc.size();
    for (std::size_t i = 1; i < fc.size(); ++i) {
        if (i <= best) unimodal = unimodal && fc[i] <= fc[i - 1];
        else unimodal = unimodal && fc[i] >= fc[i - 1];
    }
    std::string curve;
    for (std::size_t i = 0; i < fc.size(); ++i) curve += format("%s%.1f", i ? "/" : "", fc[i]);
    report(9, "pv-sweep", exact && unimodal,
           format("FC(0 kW) %s VHG (%.6f vs %.6f), minimum at %.0f kW, FC %s", exact ? "==" : "!=", fc.front(),
                  fc_vhg, grid[best], curve.c_str()));
}

void pickup_sweep(const Scenario& base, const sim::YearData& data) {
    const std::vector<double> grid{0.0, 10.0, 30.0, 50.0};
    std::vector<std::uint64_t> seeds(tol::kPickupSeeds);
    std::iota(seeds.begin(), seeds.end(), 1);
    const auto r = sweep(base, data, sim::SweepAxis::PickupUncertainty, grid, {Strategy::Proposed}, seeds);
    std::vector<double> mean(grid.size(), 0.0);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        for (auto seed : seeds) {
            mean[i] += r.find(grid[i], seed, Strategy::Proposed)->result.fc_eur -
                       r.find(0.0, seed, Strategy::Proposed)->result.fc_eur;
        }
        mean[i] /= static_cast<double>(seeds.size());
    }
    bool ok = true;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        ok = ok && mean[i] >= 0.0;
        if (i > 1) ok = ok && mean[i] >= mean[i - 1];
    }
    report(10, "pickup-uncertainty", ok,
           format("mean dFC over %zu seeds: e=10 %.2f, e=30 %.2f, e=50 %.2f EUR", seeds.size(), mean[1],
                  mean[2], mean[3]));
}

}  // namespace

int main() {
    nv_formula();
    pwl_values();
    calendar_consistency();
    oracle_equivalence();

    Scenario base;
    const sim::YearData data = io::load_year_data(base);
    YearRuns runs;
    year_invariants(base, data, runs);
    strategy_ordering(base, data, runs);
    gamma_sweep(base, data);
    battery_sweep(base, data);
    pv_sweep(base, data);
    pickup_sweep(base, data);

    std::printf("%d of 10 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
