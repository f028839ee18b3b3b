#include "agemp/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <mutex>
#include <thread>

#include "agemp/scheduler.hpp"

namespace agemp::sim {

namespace {

constexpr int kMaxRejections = 1000;
constexpr double kSoeSlack = 1e-7;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double wrap(const std::vector<double>& v, HourIndex t) {
    const auto n = static_cast<HourIndex>(v.size());
    return v[static_cast<std::size_t>(((t % n) + n) % n)];
}

struct Window {
    double lo = 0.0;
    double hi = 0.0;
    void reset(double soe) { lo = hi = soe; }
    void add(double soe) {
        lo = std::min(lo, soe);
        hi = std::max(hi, soe);
    }
    double dod() const { return hi - lo; }
};

}  // namespace

void YearData::require(HourIndex hours) const {
    const auto need = static_cast<std::size_t>(hours);
    if (spot_price.size() < need) {
        throw std::invalid_argument("spot price series covers " + std::to_string(spot_price.size()) +
                                    " hours; missing data from hour " + std::to_string(spot_price.size()));
    }
    if (household_load.size() < need) {
        throw std::invalid_argument("household load series covers " +
                                    std::to_string(household_load.size()) + " hours; missing data from hour " +
                                    std::to_string(household_load.size()));
    }
    if (irradiance.size() < need) {
        throw std::invalid_argument("irradiance series covers " + std::to_string(irradiance.size()) +
                                    " hours; missing data from hour " + std::to_string(irradiance.size()));
    }
}

double sample_truncated(const TruncatedGaussian& g, Rng& rng, bool* fell_back) {
    if (fell_back) *fell_back = false;
    if (g.stddev <= 0.0) return std::clamp(g.mean, g.min, g.max);
    std::normal_distribution<double> normal(g.mean, g.stddev);
    for (int i = 0; i < kMaxRejections; ++i) {
        const double v = normal(rng);
        if (v >= g.min && v <= g.max) return v;
    }
    if (fell_back) *fell_back = true;
    return std::clamp(g.mean, g.min, g.max);
}

DaySample sample_day(const DrivingPatternModel& pattern, Rng& rng) {
    DaySample d;
    bool fb1 = false, fb2 = false, fb3 = false;
    d.pickup_hour = sample_truncated(pattern.pickup_hour, rng, &fb1);
    d.parking_start_hour = sample_truncated(pattern.parking_start_hour, rng, &fb2);
    d.distance_km = sample_truncated(pattern.daily_distance_km, rng, &fb3);
    d.fell_back = fb1 || fb2 || fb3;
    return d;
}

DriveResult driving_step(double soe, double distance_km, const EvSpec& ev) {
    if (distance_km < 0.0) throw std::invalid_argument("driving_step: negative distance");
    const double next = soe - distance_km / (ev.efficiency_km_per_kwh * ev.usable_capacity_kwh);
    return {std::max(0.0, next), next < ev.soe_min - 1e-12};
}

HourlyFlows rule_based_home_dispatch(double household_load, double pv, double pv_max_kwh) {
    HourlyFlows f;
    const double load = std::max(0.0, household_load);
    const double production = std::max(0.0, pv);
    const double usable = std::min(production, pv_max_kwh);
    f.pv2h = std::min(usable, load);
    f.pv2g = usable - f.pv2h;
    f.pv2curt = production - f.pv2h - f.pv2g;
    f.g2h = load - f.pv2h;
    return f;
}

PerturbationDraw draw_perturbation(Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    PerturbationDraw d;
    d.change = u(rng);
    d.later = u(rng) < 0.5;
    d.magnitude = u(rng);
    return d;
}

ParkingSession perturb_pickup(const ParkingSession& session, double e_pct, double p_change,
                              const PerturbationDraw& draw, HourIndex latest_pickup) {
    ParkingSession out = session;
    out.actual_pickup_hour = session.declared_pickup_hour;
    const auto max_shift = static_cast<HourIndex>(std::floor(e_pct * static_cast<double>(session.duration()) / 100.0));
    if (max_shift < 1 || !(draw.change < p_change)) return out;
    const HourIndex shift = 1 + std::min(max_shift - 1, static_cast<HourIndex>(draw.magnitude * static_cast<double>(max_shift)));
    const HourIndex actual = session.declared_pickup_hour + (draw.later ? shift : -shift);
    const HourIndex hi = std::max(session.arrival_hour + 1, latest_pickup);
    out.actual_pickup_hour = std::clamp(actual, session.arrival_hour + 1, hi);
    return out;
}

ParkingSession perturb_pickup(const ParkingSession& session, double e_pct, double p_change, Rng& rng,
                              HourIndex latest_pickup) {
    return perturb_pickup(session, e_pct, p_change, draw_perturbation(rng), latest_pickup);
}

Schedule build_schedule(const Scenario& scenario) {
    const HourIndex end = scenario.simulation_hours - 1;
    Rng pattern_rng(scenario.seed);
    Rng perturb_rng(splitmix64(scenario.uncertainty.seed));
    Schedule s;

    std::vector<HourIndex> pickups, arrivals;
    std::vector<double> distances;
    const HourIndex days = scenario.simulation_hours / kHoursPerDay + 2;
    for (HourIndex d = 0; d < days; ++d) {
        const DaySample day = sample_day(scenario.driving, pattern_rng);
        if (day.fell_back) s.notes.push_back({d * kHoursPerDay, "sampling_fallback", "clamped mean used"});
        const HourIndex base = d * kHoursPerDay;
        const HourIndex p = base + static_cast<HourIndex>(std::lround(day.pickup_hour));
        const HourIndex a = std::max(p + 2, base + static_cast<HourIndex>(std::lround(day.parking_start_hour)));
        pickups.push_back(p);
        arrivals.push_back(a);
        distances.push_back(day.distance_km);
    }

    HourIndex arrival = 0;
    for (std::size_t d = 0; arrival <= end; ++d) {
        ParkingSession ps;
        ps.arrival_hour = arrival;
        ps.declared_pickup_hour = std::min(pickups[d], end);
        ps.actual_pickup_hour = ps.declared_pickup_hour;
        const HourIndex next_arrival = arrivals[d];
        const PerturbationDraw draw = draw_perturbation(perturb_rng);
        if (scenario.uncertainty.pickup_error_pct > 0.0 && ps.declared_pickup_hour > ps.arrival_hour) {
            const HourIndex latest = std::min(next_arrival - 2, end);
            ps = perturb_pickup(ps, scenario.uncertainty.pickup_error_pct, scenario.uncertainty.p_change,
                                draw, latest);
        }
        s.sessions.push_back(ps);
        s.trip_distance_km.push_back(distances[d]);
        arrival = next_arrival;
    }
    return s;
}

namespace {

class YearRunner {
public:
    YearRunner(const Scenario& sc, const YearData& data, const RunOptions& opt)
        : sc_(sc),
          opt_(opt),
          plant_(sc.degradation),
          solver_(lp::make_solver(opt.backend)),
          nv_(compute_net_present_value(sc.economics, sc.ev.usable_capacity_kwh)),
          pv_capacity_(sc.pv.effective_capacity_kwh()) {
        data.require(sc.simulation_hours);
        spot_ = data.spot_price;
        load_ = data.household_load;
        for (double& v : load_) v *= sc.data.load_scale;
        pv_.resize(data.irradiance.size());
        for (std::size_t i = 0; i < pv_.size(); ++i) pv_[i] = data.irradiance[i] * pv_capacity_;
        load_provider_ = forecast::make_provider(sc.forecast, load_);
        irr_provider_ = forecast::make_provider(sc.forecast, data.irradiance);
        irradiance_ = data.irradiance;
    }

    SimulationResult run();

private:
    std::vector<double> forecast_series(forecast::Series series, HourIndex t, int horizon);
    void parked_hour(HourIndex t, const ParkingSession& session, bool first_of_session);
    void idle_hour(HourIndex t);
    void driving_hour(HourIndex t, double distance_km);
    void account(HourIndex t, Mode mode, const HourlyFlows& f, double soe_before, double floor,
                 bool relaxed);
    void note(HourIndex t, std::string kind, std::string detail) {
        result_.violations.push_back({t, std::move(kind), std::move(detail)});
    }

    const Scenario& sc_;
    const RunOptions& opt_;
    degradation::PlantModel plant_;
    std::unique_ptr<lp::Solver> solver_;
    double nv_;
    double pv_capacity_;
    std::vector<double> spot_, load_, pv_, irradiance_;
    std::unique_ptr<forecast::Provider> load_provider_, irr_provider_;
    forecast::SeasonalNaiveProvider backup_;

    SimulationResult result_;
    double soe_ = 0.0;
    DegradationState deg_;
    Window window_;
    std::vector<double> planned_;  // predicted SoE after the applied hour
    double session_kcyc_ = 0.0;
};

std::vector<double> YearRunner::forecast_series(forecast::Series series, HourIndex t, int horizon) {
    const std::vector<double>& truth = series == forecast::Series::HouseholdLoad ? load_ : irradiance_;
    forecast::ForecastRequest req;
    req.series = series;
    for (int i = 0; i < forecast::kWindow; ++i) req.history[i] = wrap(truth, t - (forecast::kWindow - 1) + i);
    req.origin_hour = t;
    req.day_of_year = static_cast<int>((t / kHoursPerDay) % 365);
    req.hour_of_day = static_cast<int>(t % kHoursPerDay);
    req.horizon = horizon;
    forecast::Provider& provider =
        series == forecast::Series::HouseholdLoad ? *load_provider_ : *irr_provider_;
    try {
        return forecast::forecast_recursive(provider, req).values;
    } catch (const forecast::ProviderError& e) {
        note(t, "forecast_fallback", e.what());
        return forecast::forecast_recursive(backup_, req).values;
    }
}

void YearRunner::parked_hour(HourIndex t, const ParkingSession& session, bool first_of_session) {
    const EvSpec& ev = sc_.ev;
    const int h = static_cast<int>(session.declared_pickup_hour - t + 1);

    double dod;
    if (first_of_session) {
        dod = std::abs(ev.pickup_soe - soe_);
    } else {
        double lo = window_.lo, hi = window_.hi;
        for (double s : planned_) {
            lo = std::min(lo, s);
            hi = std::max(hi, s);
        }
        dod = hi - lo;
    }
    const double kcyc = (opt_.freeze_kcyc_per_session && !first_of_session) ? session_kcyc_
                                                                            : plant_.kcyc_pct(dod);
    if (first_of_session) session_kcyc_ = kcyc;

    scheduler::HorizonInputs in;
    in.spot_price.assign(spot_.begin() + t, spot_.begin() + t + h);
    in.household_load.push_back(load_[t]);
    in.pv_production.push_back(pv_[t]);
    if (h > 1) {
        for (double v : forecast_series(forecast::Series::HouseholdLoad, t, h - 1)) in.household_load.push_back(v);
        for (double v : forecast_series(forecast::Series::SolarIrradiance, t, h - 1)) {
            in.pv_production.push_back(v * pv_capacity_);
        }
    }
    for (HourIndex k = static_cast<HourIndex>(in.spot_price.size()); k < h; ++k) {
        in.spot_price.push_back(wrap(spot_, t + k));
    }

    const scheduler::HorizonProblem problem = scheduler::build_problem(sc_, session, t, soe_, kcyc, in);
    const scheduler::HorizonSolution sol = scheduler::solve_with_fallback(problem, *solver_, opt_.solver);
    ++result_.solves;
    if (!sc_.debug_dump_dir.empty() && sol.ok()) {
        std::filesystem::create_directories(sc_.debug_dump_dir);
        scheduler::write_debug_dump(
            (std::filesystem::path(sc_.debug_dump_dir) / ("solve_" + std::to_string(t) + ".json")).string(),
            problem, sol);
    }

    HourlyFlows f;
    bool relaxed = false;
    if (sol.ok()) {
        f = sol.flows.front();
        relaxed = sol.relaxed;
        if (sol.relaxed) {
            ++result_.relaxed_solves;
            std::string fams;
            for (const auto& s : sol.infeasible_families) fams += (fams.empty() ? "" : ";") + s;
            note(t, "infeasible_fallback", fams.empty() ? "soe floors relaxed" : fams);
        }
        planned_.assign(sol.soe.begin() + 1, sol.soe.end());
    } else {
        // Emergency rule: charge as fast as the bounds allow, home by rule.
        note(t, "solver_failure", std::string(lp::to_string(sol.status)));
        f = rule_based_home_dispatch(load_[t], pv_[t], sc_.pv.max_hourly_output_kwh);
        const double room = std::max(0.0, (ev.soe_max - soe_) * ev.usable_capacity_kwh);
        f.g2v = std::min({ev.max_hourly_energy_kwh, room, std::max(0.0, sc_.grid_cap_kwh - load_[t])});
        planned_.clear();
    }
    account(t, Mode::Parked, f, soe_, problem.soe_lower.front(), relaxed);
}

void YearRunner::idle_hour(HourIndex t) {
    account(t, Mode::Idle, rule_based_home_dispatch(load_[t], pv_[t], sc_.pv.max_hourly_output_kwh), soe_,
            0.0, false);
}

void YearRunner::driving_hour(HourIndex t, double distance_km) {
    const double before = soe_;
    const DriveResult r = driving_step(soe_, distance_km, sc_.ev);
    if (r.below_min) note(t, "trip_below_min", "soe " + std::to_string(r.soe));
    soe_ = r.soe;
    account(t, Mode::Driving, rule_based_home_dispatch(load_[t], pv_[t], sc_.pv.max_hourly_output_kwh), before,
            0.0, false);
}

void YearRunner::account(HourIndex t, Mode mode, const HourlyFlows& f, double soe_before, double floor,
                         bool relaxed) {
    const EvSpec& ev = sc_.ev;
    if (mode == Mode::Parked) {
        double next = soe_before + (f.ev_charge() - f.ev_discharge()) / ev.usable_capacity_kwh;
        if (next < ev.soe_min - kSoeSlack || next > ev.soe_max + kSoeSlack) {
            if (!relaxed || next > ev.soe_max + kSoeSlack) {
                note(t, "soe_bounds", "soe " + std::to_string(next));
            }
        } else {
            next = std::clamp(next, ev.soe_min, ev.soe_max);
        }
        soe_ = next;
    }
    window_.add(soe_);
    const double delta = soe_ - soe_before;
    const double cal = plant_.kcal_pct(soe_) * degradation::calendar_weight(t);
    const double efc = std::abs(delta) / 2.0;
    const double cyc = efc > 0.0 ? plant_.kcyc_pct(window_.dod()) * efc : 0.0;
    deg_ = degradation::accumulate(deg_, cal, cyc, efc);

    HourRecord rec;
    rec.ledger.hour = t;
    rec.ledger.mode = mode;
    rec.flows = f;
    rec.soe_start = soe_before;
    rec.soe_end = soe_;
    rec.spot_price = spot_[t];
    rec.retail_price = retail_price(spot_[t], sc_.tariff);
    rec.household_load = load_[t];
    rec.pv_production = pv_[t];
    rec.dq_cal_pct = cal;
    rec.dq_cyc_pct = cyc;
    rec.efc = efc;
    rec.q_loss_pct = deg_.q_loss_pct();
    rec.soe_floor = floor;
    rec.relaxed = relaxed;
    rec.ledger.ec_eur = (f.g2v + f.g2h) * rec.retail_price;
    rec.ledger.er_eur = (sc_.tariff.v2g_price_ratio * f.v2g + f.pv2g) * rec.spot_price;
    rec.ledger.bc_eur = battery_cost(cal + cyc, nv_, sc_.economics.eol_capacity_pct);

    result_.ec_eur += rec.ledger.ec_eur;
    result_.er_eur += rec.ledger.er_eur;
    result_.bc_eur += rec.ledger.bc_eur;
    result_.v2g_kwh += f.v2g;
    result_.v2h_kwh += f.v2h;
    if (opt_.keep_records) result_.records.push_back(rec);
}

SimulationResult YearRunner::run() {
    const EvSpec& ev = sc_.ev;
    const HourIndex end = sc_.simulation_hours - 1;
    const Schedule schedule = build_schedule(sc_);
    result_.label = sc_.name;
    result_.strategy = sc_.strategy;
    result_.sessions = schedule.sessions;
    result_.violations = schedule.notes;
    if (opt_.keep_records) result_.records.reserve(static_cast<std::size_t>(sc_.simulation_hours));
    soe_ = ev.initial_soe;

    for (std::size_t i = 0; i < schedule.sessions.size(); ++i) {
        const ParkingSession& s = schedule.sessions[i];
        const HourIndex leave = std::min(s.actual_pickup_hour, end);
        const HourIndex last_parked = std::min(leave, s.declared_pickup_hour);
        window_.reset(soe_);
        planned_.clear();
        for (HourIndex t = s.arrival_hour; t <= last_parked; ++t) parked_hour(t, s, t == s.arrival_hour);
        if (leave < s.declared_pickup_hour && soe_ < ev.pickup_soe - 1e-9) {
            note(leave, "early_pickup", "soe " + std::to_string(soe_));
        }
        if (last_parked == s.declared_pickup_hour && soe_ < ev.pickup_soe - 1e-6) {
            note(last_parked, "pickup_soe_missed", "soe " + std::to_string(soe_));
        }
        for (HourIndex t = s.declared_pickup_hour + 1; t <= leave; ++t) idle_hour(t);
        if (leave >= end) break;

        const HourIndex next_arrival =
            i + 1 < schedule.sessions.size() ? schedule.sessions[i + 1].arrival_hour : end + 1;
        const HourIndex trip_end = std::min(next_arrival - 1, end);
        const HourIndex trip_hours = next_arrival - 1 - leave;
        window_.reset(soe_);
        for (HourIndex t = leave + 1; t <= trip_end; ++t) {
            driving_hour(t, schedule.trip_distance_km[i] / static_cast<double>(trip_hours));
        }
    }

    const double year_fraction = static_cast<double>(sc_.simulation_hours) / kHoursPerYear;
    result_.fixed_eur = 12.0 * sc_.tariff.monthly_tax * year_fraction + sc_.pv.annual_cost_eur() * year_fraction;
    result_.fc_eur = (result_.ec_eur - result_.er_eur) + result_.bc_eur + result_.fixed_eur;
    result_.q_cal_pct = deg_.q_loss_cal_pct;
    result_.q_cyc_pct = deg_.q_loss_cyc_pct;
    result_.q_loss_pct = deg_.q_loss_pct();
    result_.efc = deg_.efc;
    return std::move(result_);
}

}  // namespace

SimulationResult run_year(const Scenario& scenario, const YearData& data, const RunOptions& options) {
    scenario.validate();
    YearRunner runner(scenario, data, options);
    return runner.run();
}

SweepAxis parse_sweep_axis(std::string_view name) {
    if (name == "gamma") return SweepAxis::Gamma;
    if (name == "battery") return SweepAxis::Battery;
    if (name == "load-scale") return SweepAxis::LoadScale;
    if (name == "pickup-uncertainty") return SweepAxis::PickupUncertainty;
    if (name == "pv-size") return SweepAxis::PvSize;
    throw std::invalid_argument("unknown sweep axis: " + std::string(name));
}

std::string_view to_string(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::Gamma: return "gamma";
        case SweepAxis::Battery: return "battery";
        case SweepAxis::LoadScale: return "load-scale";
        case SweepAxis::PickupUncertainty: return "pickup-uncertainty";
        case SweepAxis::PvSize: return "pv-size";
    }
    return "unknown";
}

std::vector<double> default_grid(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::Gamma: return grid_with_steps(axis, 11);
        case SweepAxis::Battery: return {50.8, 64.0, 79.0, 94.0, 109.1};
        case SweepAxis::LoadScale: return {1.0, 4.0};
        case SweepAxis::PickupUncertainty: return {0.0, 10.0, 30.0, 50.0};
        case SweepAxis::PvSize: return grid_with_steps(axis, 11);
    }
    return {};
}

std::vector<double> grid_with_steps(SweepAxis axis, int steps) {
    if (steps < 1) throw std::invalid_argument("sweep: steps must be >= 1");
    double lo = 0.0, hi = 1.0;
    switch (axis) {
        case SweepAxis::Gamma: break;
        case SweepAxis::Battery: lo = 50.8; hi = 109.1; break;
        case SweepAxis::LoadScale: lo = 1.0; hi = 4.0; break;
        case SweepAxis::PickupUncertainty: lo = 0.0; hi = 50.0; break;
        case SweepAxis::PvSize: lo = 0.0; hi = 50.0; break;
    }
    if (steps == 1) return {lo};
    std::vector<double> v;
    for (int i = 0; i < steps; ++i) v.push_back(lo + (hi - lo) * i / (steps - 1));
    return v;
}

Scenario apply_axis(const Scenario& base, SweepAxis axis, double value) {
    Scenario s = base;
    switch (axis) {
        case SweepAxis::Gamma: s.tariff.v2g_price_ratio = value; break;
        case SweepAxis::Battery: s.ev.usable_capacity_kwh = value; break;
        case SweepAxis::LoadScale: s.data.load_scale = value; break;
        case SweepAxis::PickupUncertainty: s.uncertainty.pickup_error_pct = value; break;
        case SweepAxis::PvSize: s.pv.installed_capacity_kwh = value; break;
    }
    s.validate();
    return s;
}

const SweepRow* SweepResult::find(double value, std::uint64_t seed, Strategy s) const {
    for (const SweepRow& r : rows) {
        if (r.value == value && r.seed == seed && r.result.strategy == s) return &r;
    }
    return nullptr;
}

double SweepResult::economic_gain(double value, std::uint64_t seed) const {
    const SweepRow* p = find(value, seed, Strategy::Proposed);
    const SweepRow* u = find(value, seed, Strategy::Unidirectional);
    if (!p || !u) throw std::out_of_range("economic_gain: paired runs missing");
    return u->result.fc_eur - p->result.fc_eur;
}

double SweepResult::additional_degradation(double value, std::uint64_t seed) const {
    const SweepRow* p = find(value, seed, Strategy::Proposed);
    const SweepRow* u = find(value, seed, Strategy::Unidirectional);
    if (!p || !u) throw std::out_of_range("additional_degradation: paired runs missing");
    return p->result.q_loss_pct - u->result.q_loss_pct;
}

SweepResult run_sweep(const Scenario& base, const YearData& data, const SweepSpec& spec,
                      const RunOptions& options) {
    if (spec.values.empty()) throw std::invalid_argument("sweep: empty grid");
    struct Job {
        double value;
        std::uint64_t seed;
        Scenario scenario;
    };
    std::vector<Job> jobs;
    for (double v : spec.values) {
        for (std::uint64_t seed : spec.seeds) {
            for (Strategy st : spec.strategies) {
                Scenario s = apply_axis(base, spec.axis, v);
                s.strategy = st;
                if (seed != 0) {
                    s.seed = splitmix64(base.seed + seed);
                    s.uncertainty.seed = splitmix64(base.uncertainty.seed + seed);
                }
                s.name = base.name + "/" + std::string(to_string(spec.axis)) + "=" + std::to_string(v);
                jobs.push_back({v, seed, std::move(s)});
            }
        }
    }

    SweepResult out;
    out.axis = spec.axis;
    out.rows.resize(jobs.size());
    RunOptions run_opts = options;
    run_opts.keep_records = false;

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            try {
                out.rows[i] = {jobs[i].value, jobs[i].seed, run_year(jobs[i].scenario, data, run_opts)};
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    unsigned threads = spec.threads > 0 ? static_cast<unsigned>(spec.threads) : std::thread::hardware_concurrency();
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(jobs.size())));
    std::vector<std::thread> pool;
    for (unsigned i = 1; i < threads; ++i) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    return out;
}

}  // namespace agemp::sim
