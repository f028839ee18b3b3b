#include <benchmark/benchmark.h>

#include "agemp/degradation.hpp"
#include "agemp/io.hpp"
#include "agemp/scheduler.hpp"
#include "agemp/simulator.hpp"

using namespace agemp;

namespace {

scheduler::HorizonProblem evening_problem(int hours, Strategy strategy) {
    Scenario s;
    s.strategy = strategy;
    static const sim::YearData data = io::load_year_data(Scenario{});
    const HourIndex arrival = 24 * 100 + 17;
    const ParkingSession session{arrival, arrival + hours - 1, arrival + hours - 1};
    scheduler::HorizonInputs in;
    for (int k = 0; k < hours; ++k) {
        in.spot_price.push_back(data.spot_price[arrival + k]);
        in.household_load.push_back(data.household_load[arrival + k]);
        in.pv_production.push_back(data.irradiance[arrival + k] * s.pv.installed_capacity_kwh);
    }
    return scheduler::build_problem(s, session, arrival, 0.45, 0.75e-2, in);
}

void BM_PwlEval(benchmark::State& state) {
    const auto m = degradation::PwlCalendarModel::from_params(DegradationParams{});
    double soe = 0.1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(degradation::eval_pwl_kcal(soe, m));
        soe = soe > 0.89 ? 0.1 : soe + 0.001;
    }
}
BENCHMARK(BM_PwlEval);

void BM_SolveHorizon(benchmark::State& state) {
    const auto p = evening_problem(static_cast<int>(state.range(0)), Strategy::Proposed);
    const auto solver = lp::make_default_solver();
    for (auto _ : state) benchmark::DoNotOptimize(scheduler::solve(p, *solver));
}
BENCHMARK(BM_SolveHorizon)->Arg(4)->Arg(8)->Arg(15)->Arg(20)->Unit(benchmark::kMicrosecond);

void BM_SolveHorizonConvexified(benchmark::State& state) {
    auto p = evening_problem(static_cast<int>(state.range(0)), Strategy::Proposed);
    p.pwl_mode = PwlMode::Convexified;
    const auto solver = lp::make_default_solver();
    for (auto _ : state) benchmark::DoNotOptimize(scheduler::solve(p, *solver));
}
BENCHMARK(BM_SolveHorizonConvexified)->Arg(15)->Unit(benchmark::kMicrosecond);

void BM_SimulateMonth(benchmark::State& state) {
    Scenario s;
    s.simulation_hours = 24 * 30;
    const auto data = io::load_year_data(s);
    for (auto _ : state) benchmark::DoNotOptimize(sim::run_year(s, data).fc_eur);
}
BENCHMARK(BM_SimulateMonth)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
