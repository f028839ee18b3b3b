// agemp command-line tool: run, sweep, fit-pwl, gen-data, validate, report.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "agemp/degradation.hpp"
#include "agemp/io.hpp"
#include "agemp/simulator.hpp"

namespace fs = std::filesystem;
using namespace agemp;

namespace {

struct RunArgs {
    std::string scenario;
    std::optional<std::uint64_t> seed;
    std::string strategy;
    std::string out = "out";
    bool freeze_kcyc = false;
};

struct SweepArgs {
    std::string scenario;
    std::string axis;
    int steps = 0;
    std::vector<double> values;
    std::vector<std::string> strategies{"proposed", "unidirectional"};
    int replicates = 0;
    std::vector<std::uint64_t> seeds;
    std::string by_axis;
    std::vector<double> by_values;
    int threads = 0;
    std::string out = "out";
};

struct FitArgs {
    std::string curve;
    std::vector<double> knots{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    std::string out;
};

struct GenArgs {
    std::string kind = "all";
    std::uint64_t seed = 2022;
    std::int64_t hours = kHoursPerYear;
    std::string out = "data";
};

struct ValidateArgs {
    std::string scenario;
    std::string ledger;
    std::string result;
    std::string sweep;
};

Scenario scenario_or_default(const std::string& path) {
    return path.empty() ? Scenario{} : io::load_scenario(path);
}

int cmd_run(const RunArgs& a) {
    Scenario s = scenario_or_default(a.scenario);
    if (a.seed) s.seed = *a.seed;
    if (!a.strategy.empty()) s.strategy = parse_strategy(a.strategy);
    const sim::YearData data = io::load_year_data(s);
    sim::RunOptions opts;
    opts.freeze_kcyc_per_session = a.freeze_kcyc;
    const sim::SimulationResult r = sim::run_year(s, data, opts);
    const fs::path out(a.out);
    io::write_results(out / "result.csv", {io::to_row(r)});
    io::write_ledger(out / "ledger.csv", r.records);
    io::write_violations(out / "violations.csv", r.violations);
    std::printf("%s %s: FC %.2f EUR, EC-ER %.2f EUR, BC %.2f EUR, Q_loss %.4f %%, EFC %.2f, violations %zu\n",
                r.label.c_str(), std::string(to_string(r.strategy)).c_str(), r.fc_eur, r.ec_eur - r.er_eur,
                r.bc_eur, r.q_loss_pct, r.efc, r.violations.size());
    return 0;
}

int cmd_sweep(const SweepArgs& a) {
    const Scenario base = scenario_or_default(a.scenario);
    const sim::YearData data = io::load_year_data(base);
    sim::SweepSpec spec;
    spec.axis = sim::parse_sweep_axis(a.axis);
    spec.values = !a.values.empty() ? a.values
                  : a.steps > 0     ? sim::grid_with_steps(spec.axis, a.steps)
                                    : sim::default_grid(spec.axis);
    spec.strategies.clear();
    for (const auto& s : a.strategies) spec.strategies.push_back(parse_strategy(s));
    if (!a.seeds.empty()) {
        spec.seeds = a.seeds;
    } else if (a.replicates > 0) {
        spec.seeds.clear();
        for (int i = 1; i <= a.replicates; ++i) spec.seeds.push_back(static_cast<std::uint64_t>(i));
    } else {
        spec.seeds = {0};
    }
    spec.threads = a.threads;

    std::vector<double> by_values = a.by_values;
    std::optional<sim::SweepAxis> by;
    if (!a.by_axis.empty()) {
        by = sim::parse_sweep_axis(a.by_axis);
        if (by_values.empty()) by_values = sim::default_grid(*by);
    } else {
        by_values = {0.0};
    }

    std::vector<io::SweepRun> runs;
    for (double bv : by_values) {
        const Scenario scenario = by ? sim::apply_axis(base, *by, bv) : base;
        const sim::SweepResult result = sim::run_sweep(scenario, data, spec);
        for (const sim::SweepRow& row : result.rows) {
            io::SweepRun r;
            r.axis = a.axis;
            r.value = row.value;
            r.by_axis = by ? std::string(sim::to_string(*by)) : "none";
            r.by_value = by ? bv : 0.0;
            r.seed = row.seed;
            r.result = io::to_row(row.result);
            r.v2g_kwh = row.result.v2g_kwh;
            r.v2h_kwh = row.result.v2h_kwh;
            r.relaxed_solves = row.result.relaxed_solves;
            runs.push_back(std::move(r));
        }
    }
    const fs::path out(a.out);
    io::write_sweep_runs(out / "sweep_runs.csv", runs);
    io::write_sweep_summary(out / "sweep.csv", runs);
    std::printf("sweep %s: %zu runs written to %s\n", a.axis.c_str(), runs.size(), out.string().c_str());
    return 0;
}

int cmd_fit(const FitArgs& a) {
    const io::Curve curve = io::load_curve(a.curve);
    const auto model = degradation::fit_pwl(std::cref(curve), a.knots);
    if (a.out.empty()) {
        io::write_pwl(std::cout, model);
    } else {
        io::write_pwl(a.out, model);
    }
    return 0;
}

int cmd_gen(const GenArgs& a) {
    std::vector<io::SeriesKind> kinds;
    if (a.kind == "all") {
        kinds = {io::SeriesKind::SpotPrice, io::SeriesKind::HouseholdLoad, io::SeriesKind::Irradiance};
    } else {
        kinds = {io::parse_series_kind(a.kind)};
    }
    for (io::SeriesKind k : kinds) {
        const fs::path file = fs::path(a.out) / (std::string(io::to_string(k)) + ".csv");
        io::write_series(file, k, io::generate_synthetic(k, a.seed, a.hours));
        std::printf("%s\n", file.string().c_str());
    }
    return 0;
}

int cmd_validate(const ValidateArgs& a) {
    int failures = 0;
    if (!a.ledger.empty()) {
        const Scenario s = scenario_or_default(a.scenario);
        const auto records = io::read_ledger(a.ledger);
        std::optional<io::ResultRow> result;
        if (!a.result.empty()) {
            const auto rows = io::read_results(a.result);
            if (rows.size() != 1) {
                std::fprintf(stderr, "%s: expected one result row, got %zu\n", a.result.c_str(), rows.size());
                return 1;
            }
            result = rows.front();
        }
        const auto problems = io::replay_ledger(s, records, result ? &*result : nullptr);
        for (const auto& p : problems) std::fprintf(stderr, "ledger: %s\n", p.c_str());
        failures += static_cast<int>(problems.size());
        std::printf("ledger %s: %zu hours, %zu problems\n", a.ledger.c_str(), records.size(), problems.size());
    } else if (!a.result.empty()) {
        const auto rows = io::read_results(a.result);
        for (const auto& r : rows) {
            if (std::abs(r.q_loss_pct - r.q_cal_pct - r.q_cyc_pct) > 1e-9) {
                std::fprintf(stderr, "%s: Q_loss differs from calendar plus cycle\n", r.label.c_str());
                ++failures;
            }
        }
        std::printf("results %s: %zu rows\n", a.result.c_str(), rows.size());
    }
    if (!a.sweep.empty()) {
        const auto runs = io::read_sweep_runs(a.sweep);
        std::printf("sweep %s: %zu runs\n", a.sweep.c_str(), runs.size());
    }
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Aging-aware EV/PV home energy management simulator"};
    app.require_subcommand(1);

    RunArgs run;
    auto* c_run = app.add_subcommand("run", "Simulate one scenario year");
    c_run->add_option("--scenario", run.scenario, "Scenario JSON file (defaults when omitted)");
    c_run->add_option("--seed", run.seed, "Driving-pattern seed override");
    c_run->add_option("--strategy", run.strategy, "proposed|unidirectional|energy-only|degradation-only");
    c_run->add_option("--out", run.out, "Output directory");
    c_run->add_flag("--freeze-kcyc", run.freeze_kcyc, "Keep the cycle rate fixed per parking session");

    SweepArgs sweep;
    auto* c_sweep = app.add_subcommand("sweep", "Sensitivity sweep over one axis");
    c_sweep->add_option("--scenario", sweep.scenario, "Scenario JSON file");
    c_sweep->add_option("--axis", sweep.axis, "gamma|battery|load-scale|pickup-uncertainty|pv-size")->required();
    c_sweep->add_option("--steps", sweep.steps, "Evenly spaced points over the default range");
    c_sweep->add_option("--values", sweep.values, "Explicit grid")->delimiter(',');
    c_sweep->add_option("--strategies", sweep.strategies, "Strategies per point")->delimiter(',');
    c_sweep->add_option("--replicates", sweep.replicates, "Replicate seeds 1..n");
    c_sweep->add_option("--seeds", sweep.seeds, "Explicit replicate seeds")->delimiter(',');
    c_sweep->add_option("--by-axis", sweep.by_axis, "Secondary axis, swept in an outer loop");
    c_sweep->add_option("--by-values", sweep.by_values, "Grid of the secondary axis")->delimiter(',');
    c_sweep->add_option("--threads", sweep.threads, "Worker threads (0: all cores)");
    c_sweep->add_option("--out", sweep.out, "Output directory");

    FitArgs fit;
    auto* c_fit = app.add_subcommand("fit-pwl", "Secant PWL fit of a sampled calendar-rate curve");
    c_fit->add_option("--curve", fit.curve, "CSV with header soe,value")->required();
    c_fit->add_option("--knots", fit.knots, "Breakpoints including the domain ends")->delimiter(',');
    c_fit->add_option("--out", fit.out, "Output CSV (stdout when omitted)");

    GenArgs gen;
    auto* c_gen = app.add_subcommand("gen-data", "Write synthetic hourly series");
    c_gen->add_option("--kind", gen.kind, "spot|load|irradiance|all");
    c_gen->add_option("--seed", gen.seed, "Generator seed");
    c_gen->add_option("--hours", gen.hours, "Number of hours");
    c_gen->add_option("--out", gen.out, "Output directory");

    ValidateArgs val;
    auto* c_val = app.add_subcommand("validate", "Replay a ledger and re-check every invariant");
    c_val->add_option("--scenario", val.scenario, "Scenario the ledger was produced with");
    c_val->add_option("--ledger", val.ledger, "Ledger CSV");
    c_val->add_option("--result", val.result, "Result CSV");
    c_val->add_option("--sweep", val.sweep, "Sweep runs CSV");

    std::string report_runs, report_out = "report";
    auto* c_rep = app.add_subcommand("report", "Plot-ready tables from sweep runs");
    c_rep->add_option("--runs", report_runs, "sweep_runs.csv")->required();
    c_rep->add_option("--out", report_out, "Output directory");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*c_run) return cmd_run(run);
        if (*c_sweep) return cmd_sweep(sweep);
        if (*c_fit) return cmd_fit(fit);
        if (*c_gen) return cmd_gen(gen);
        if (*c_val) return cmd_validate(val);
        if (*c_rep) {
            for (const auto& f : io::write_report(io::read_sweep_runs(report_runs), report_out)) {
                std::printf("%s\n", f.string().c_str());
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}
