#include "agemp/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace agemp::io {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::string fmt_fixed(double v, int decimals) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, decimals);
    std::string s(buf, r.ptr);
    if (!s.empty() && s[0] == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
    return s;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& s, double& out) {
    const std::string t = trim(s);
    if (t.empty()) return false;
    const auto r = std::from_chars(t.data(), t.data() + t.size(), out);
    return r.ec == std::errc() && r.ptr == t.data() + t.size();
}

bool parse_int(const std::string& s, std::int64_t& out) {
    const std::string t = trim(s);
    if (t.empty()) return false;
    const auto r = std::from_chars(t.data(), t.data() + t.size(), out);
    return r.ec == std::errc() && r.ptr == t.data() + t.size();
}

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

std::ifstream open_in(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    return in;
}

std::string sanitize(std::string s) {
    std::replace(s.begin(), s.end(), ',', ';');
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
}

/// Table reader that maps header names to column positions.
class Table {
public:
    Table(const fs::path& path, std::string_view expected_header) : path_(path.string()) {
        std::ifstream in = open_in(path);
        std::string line;
        if (!std::getline(in, line)) throw ParseError(path_, 0, "empty file");
        if (trim(line) != expected_header) throw ParseError(path_, 0, "unexpected header: " + trim(line));
        columns_ = split(std::string(expected_header));
        while (std::getline(in, line)) {
            if (trim(line).empty()) continue;
            auto cells = split(trim(line));
            if (cells.size() != columns_.size()) {
                throw ParseError(path_, static_cast<std::int64_t>(rows_.size()) + 1,
                                 "expected " + std::to_string(columns_.size()) + " cells, got " +
                                     std::to_string(cells.size()));
            }
            rows_.push_back(std::move(cells));
        }
    }

    std::size_t size() const { return rows_.size(); }

    const std::string& text(std::size_t row, std::string_view col) const { return rows_[row][index(col)]; }

    double num(std::size_t row, std::string_view col) const {
        double v = 0.0;
        if (!parse_double(text(row, col), v)) {
            throw ParseError(path_, static_cast<std::int64_t>(row) + 1,
                             "column " + std::string(col) + ": not a number: " + text(row, col));
        }
        return v;
    }

    std::int64_t integer(std::size_t row, std::string_view col) const {
        std::int64_t v = 0;
        if (!parse_int(text(row, col), v)) {
            throw ParseError(path_, static_cast<std::int64_t>(row) + 1,
                             "column " + std::string(col) + ": not an integer: " + text(row, col));
        }
        return v;
    }

private:
    std::size_t index(std::string_view col) const {
        const auto it = std::find(columns_.begin(), columns_.end(), col);
        if (it == columns_.end()) throw std::logic_error("unknown column " + std::string(col));
        return static_cast<std::size_t>(it - columns_.begin());
    }

    std::string path_;
    std::vector<std::string> columns_;
    std::vector<std::vector<std::string>> rows_;
};

std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double gauss(double x, double mu, double width) {
    const double z = (x - mu) / width;
    return std::exp(-0.5 * z * z);
}

std::vector<double> synthetic_load(std::mt19937_64& rng, std::int64_t hours) {
    std::normal_distribution<double> n01(0.0, 1.0);
    std::vector<double> v(static_cast<std::size_t>(hours));
    double day_factor = 0.0;
    for (std::int64_t t = 0; t < hours; ++t) {
        const double h = static_cast<double>(t % kHoursPerDay);
        const double d = static_cast<double>(t / kHoursPerDay);
        if (t % kHoursPerDay == 0) day_factor = 0.7 * day_factor + 0.3 * n01(rng);
        const double shape = 0.45 + 0.55 * gauss(h, 7.5, 1.3) + 1.0 * gauss(h, 19.0, 2.0) + 0.25 * gauss(h, 12.5, 2.5);
        const double season = 1.0 + 0.3 * std::cos(2.0 * std::numbers::pi * (d + 10.0) / 365.0);
        const double noise = std::exp(0.12 * day_factor + 0.2 * n01(rng));
        v[static_cast<std::size_t>(t)] = shape * season * noise;
    }
    double total = 0.0;
    for (double x : v) total += x;
    const double target = 21.6 * static_cast<double>(hours) / kHoursPerDay;
    for (double& x : v) x *= target / total;
    return v;
}

std::vector<double> synthetic_irradiance(std::mt19937_64& rng, std::int64_t hours) {
    constexpr double kLatitude = 57.7 * std::numbers::pi / 180.0;
    std::normal_distribution<double> n01(0.0, 1.0);
    std::vector<double> v(static_cast<std::size_t>(hours));
    double cloud_state = 0.0;
    for (std::int64_t t = 0; t < hours; ++t) {
        const double h = static_cast<double>(t % kHoursPerDay);
        const double n = static_cast<double>((t / kHoursPerDay) % 365 + 1);
        if (t % kHoursPerDay == 0) cloud_state = 0.6 * cloud_state + 0.8 * n01(rng);
        const double decl = 23.45 * std::numbers::pi / 180.0 * std::sin(2.0 * std::numbers::pi * (284.0 + n) / 365.0);
        const double omega = (h + 0.5 - 12.0) * 15.0 * std::numbers::pi / 180.0;
        const double sin_elev = std::sin(kLatitude) * std::sin(decl) + std::cos(kLatitude) * std::cos(decl) * std::cos(omega);
        const double clear = sin_elev > 0.0 ? 0.95 * std::pow(sin_elev, 1.15) : 0.0;
        const double cloud = 0.2 + 0.8 / (1.0 + std::exp(-(cloud_state + 0.4 + 0.25 * n01(rng))));
        v[static_cast<std::size_t>(t)] = std::clamp(clear * cloud, 0.0, 1.0);
    }
    return v;
}

std::vector<double> synthetic_spot(std::mt19937_64& rng, std::int64_t hours) {
    static constexpr double kShape[24] = {0.45, 0.42, 0.40, 0.40, 0.43, 0.55, 0.85, 1.20,
                                          1.30, 1.15, 1.00, 0.95, 0.92, 0.92, 0.95, 1.05,
                                          1.30, 1.65, 1.80, 1.75, 1.50, 1.20, 0.95, 0.70};
    std::normal_distribution<double> n01(0.0, 1.0);
    std::vector<double> v(static_cast<std::size_t>(hours));
    double level_noise = 0.0;
    for (std::int64_t t = 0; t < hours; ++t) {
        const int h = static_cast<int>(t % kHoursPerDay);
        const double d = static_cast<double>(t / kHoursPerDay);
        if (h == 0) level_noise = 0.85 * level_noise + 0.015 * n01(rng);
        const double level = 0.13 + 0.05 * std::cos(2.0 * std::numbers::pi * (d + 10.0) / 365.0) + level_noise;
        const double spread = 1.0 + 0.25 * std::cos(2.0 * std::numbers::pi * (d + 10.0) / 365.0);
        const double shape = 1.0 + spread * (kShape[h] - 1.0);
        v[static_cast<std::size_t>(t)] = std::max(0.0, level * shape + 0.012 * n01(rng));
    }
    return v;
}

// Strict reader for one JSON object: every key must be consumed.
class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
    }

    template <class T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(path_ + "." + key + ": " + e.what());
        }
    }

    bool has(const char* key) const { return j_.contains(key); }

    Reader child(const char* key) {
        seen_.insert(key);
        static const json empty = json::object();
        return Reader(j_.contains(key) ? j_.at(key) : empty, path_ + "." + key);
    }

    void finish() const {
        for (const auto& [k, _] : j_.items()) {
            if (!seen_.count(k)) throw ConfigError(path_ + ": unknown key '" + k + "'");
        }
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

void read_gaussian(Reader r, TruncatedGaussian& g, const char* unit) {
    const std::string u(unit);
    r.get(("mean_" + u).c_str(), g.mean);
    r.get(("stddev_" + u).c_str(), g.stddev);
    r.get(("min_" + u).c_str(), g.min);
    r.get(("max_" + u).c_str(), g.max);
    r.finish();
}

json gaussian_json(const TruncatedGaussian& g, const std::string& u) {
    return {{"mean_" + u, g.mean}, {"stddev_" + u, g.stddev}, {"min_" + u, g.min}, {"max_" + u, g.max}};
}

std::string resolve(const std::string& p, const fs::path& base) {
    if (p.empty() || base.empty() || fs::path(p).is_absolute()) return p;
    return (base / p).lexically_normal().string();
}

}  // namespace

ParseError::ParseError(const std::string& file, std::int64_t row, const std::string& what)
    : std::runtime_error(file + (row > 0 ? ": row " + std::to_string(row) : std::string()) + ": " + what),
      row_(row) {}

SeriesKind parse_series_kind(std::string_view name) {
    if (name == "spot") return SeriesKind::SpotPrice;
    if (name == "load") return SeriesKind::HouseholdLoad;
    if (name == "irradiance") return SeriesKind::Irradiance;
    throw std::invalid_argument("unknown series kind: " + std::string(name));
}

std::string_view to_string(SeriesKind kind) {
    switch (kind) {
        case SeriesKind::SpotPrice: return "spot";
        case SeriesKind::HouseholdLoad: return "load";
        case SeriesKind::Irradiance: return "irradiance";
    }
    return "unknown";
}

std::string_view value_column(SeriesKind kind) {
    switch (kind) {
        case SeriesKind::SpotPrice: return "spot_eur_per_kwh";
        case SeriesKind::HouseholdLoad: return "load_kwh";
        case SeriesKind::Irradiance: return "irradiance";
    }
    return "value";
}

std::vector<double> load_series(const fs::path& path, SeriesKind kind, std::int64_t expected_rows) {
    const std::string file = path.string();
    std::ifstream in(path);
    if (!in) throw ParseError(file, 0, "cannot open file");
    std::string line;
    if (!std::getline(in, line)) throw ParseError(file, 0, "empty file");
    const auto header = split(trim(line));
    if (header.size() < 2) throw ParseError(file, 0, "header needs an index column and a value column");
    const std::string first = trim(header.front());
    if (first != "hour" && first != "timestamp") {
        throw ParseError(file, 0, "first column must be 'hour' or 'timestamp', got '" + first + "'");
    }
    const bool indexed = first == "hour";

    std::vector<double> values;
    std::int64_t row = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        ++row;
        const auto cells = split(trim(line));
        if (cells.size() != header.size()) {
            throw ParseError(file, row, "expected " + std::to_string(header.size()) + " cells");
        }
        if (indexed) {
            std::int64_t hour = 0;
            if (!parse_int(cells.front(), hour)) throw ParseError(file, row, "bad hour index: " + cells.front());
            const auto expected = static_cast<std::int64_t>(values.size());
            if (hour < expected) throw ParseError(file, row, "duplicate hour index " + std::to_string(hour));
            if (hour > expected) {
                throw ParseError(file, row, "gap: expected hour " + std::to_string(expected) + ", got " +
                                                std::to_string(hour));
            }
        }
        double v = 0.0;
        if (!parse_double(cells.back(), v) || !std::isfinite(v)) {
            throw ParseError(file, row, "bad value: " + cells.back());
        }
        if (kind == SeriesKind::Irradiance && (v < 0.0 || v > 1.0)) {
            throw ParseError(file, row, "irradiance " + fmt(v) + " outside [0, 1]");
        }
        if (kind == SeriesKind::HouseholdLoad && v < 0.0) {
            throw ParseError(file, row, "negative load " + fmt(v));
        }
        values.push_back(v);
    }
    if (expected_rows > 0 && static_cast<std::int64_t>(values.size()) != expected_rows) {
        throw ParseError(file, 0, "expected " + std::to_string(expected_rows) + " rows, got " +
                                      std::to_string(values.size()));
    }
    if (values.empty()) throw ParseError(file, 0, "no data rows");
    return values;
}

void write_series(const fs::path& path, SeriesKind kind, const std::vector<double>& values) {
    std::ofstream out = open_out(path);
    out << "hour," << value_column(kind) << '\n';
    for (std::size_t i = 0; i < values.size(); ++i) out << i << ',' << fmt(values[i]) << '\n';
}

std::vector<double> generate_synthetic(SeriesKind kind, std::uint64_t seed, std::int64_t hours) {
    if (hours <= 0) throw std::invalid_argument("generate_synthetic: hours must be > 0");
    std::mt19937_64 rng(mix(seed ^ (0x51ed270b27fa1ULL * (static_cast<std::uint64_t>(kind) + 1))));
    switch (kind) {
        case SeriesKind::SpotPrice: return synthetic_spot(rng, hours);
        case SeriesKind::HouseholdLoad: return synthetic_load(rng, hours);
        case SeriesKind::Irradiance: return synthetic_irradiance(rng, hours);
    }
    return {};
}

sim::YearData load_year_data(const Scenario& scenario) {
    const std::int64_t hours = std::max<std::int64_t>(scenario.simulation_hours, kHoursPerYear);
    const auto get = [&](const std::string& path, SeriesKind kind) {
        return path.empty() ? generate_synthetic(kind, scenario.data.synthetic_seed, hours) : load_series(path, kind);
    };
    sim::YearData data;
    data.spot_price = get(scenario.data.spot_price_csv, SeriesKind::SpotPrice);
    data.household_load = get(scenario.data.household_load_csv, SeriesKind::HouseholdLoad);
    data.irradiance = get(scenario.data.irradiance_csv, SeriesKind::Irradiance);
    data.require(scenario.simulation_hours);
    return data;
}

Scenario scenario_from_json(std::string_view text, const fs::path& base_dir) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("scenario: ") + e.what());
    }
    Scenario s;
    Reader r(root, "scenario");
    r.get("name", s.name);
    std::string strategy(to_string(s.strategy)), pwl(to_string(s.pwl_mode));
    r.get("strategy", strategy);
    r.get("pwl_mode", pwl);
    s.strategy = parse_strategy(strategy);
    s.pwl_mode = parse_pwl_mode(pwl);
    r.get("seed", s.seed);
    r.get("simulation_hours", s.simulation_hours);
    r.get("grid_cap_kwh", s.grid_cap_kwh);
    r.get("debug_dump_dir", s.debug_dump_dir);

    {
        Reader e = r.child("ev");
        e.get("usable_capacity_kwh", s.ev.usable_capacity_kwh);
        e.get("efficiency_km_per_kwh", s.ev.efficiency_km_per_kwh);
        e.get("max_hourly_energy_kwh", s.ev.max_hourly_energy_kwh);
        e.get("pickup_soe_frac", s.ev.pickup_soe);
        e.get("soe_min_frac", s.ev.soe_min);
        e.get("soe_max_frac", s.ev.soe_max);
        e.get("safety_soe_frac", s.ev.safety_soe);
        e.get("initial_soe_frac", s.ev.initial_soe);
        e.finish();
    }
    {
        Reader p = r.child("pv");
        p.get("enabled", s.pv.enabled);
        p.get("installed_capacity_kwh", s.pv.installed_capacity_kwh);
        p.get("max_hourly_output_kwh", s.pv.max_hourly_output_kwh);
        p.get("annualized_cost_eur_per_kwh_year", s.pv.annualized_cost_eur_per_kwh_year);
        p.finish();
    }
    {
        Reader t = r.child("tariff");
        t.get("vat_rate_frac", s.tariff.vat_rate);
        t.get("variable_fee_eur_per_kwh", s.tariff.variable_fee);
        t.get("delivery_fee_eur_per_kwh", s.tariff.delivery_fee);
        t.get("network_fee_eur_per_kwh", s.tariff.network_fee);
        t.get("monthly_tax_eur", s.tariff.monthly_tax);
        t.get("v2g_price_ratio_frac", s.tariff.v2g_price_ratio);
        t.finish();
    }
    {
        Reader b = r.child("battery_economics");
        b.get("nominal_life_years", s.economics.nominal_life_years);
        b.get("replacement_cost_eur_per_kwh", s.economics.replacement_cost_eur_per_kwh);
        b.get("residual_frac", s.economics.residual_fraction);
        b.get("discount_rate_frac", s.economics.discount_rate);
        b.get("eol_capacity_pct", s.economics.eol_capacity_pct);
        b.finish();
    }
    {
        Reader d = r.child("degradation");
        DegradationParams& p = s.degradation;
        d.get("pwl_intercept_per_sqrt_h", p.pwl_intercept);
        d.get("pwl_first_slope_per_sqrt_h", p.pwl_first_slope);
        d.get("pwl_breakpoints_frac", p.pwl_breakpoints);
        d.get("pwl_slope_changes_per_sqrt_h", p.pwl_slope_changes);
        d.get("pwl_domain_lo_frac", p.pwl_domain_lo);
        d.get("pwl_domain_hi_frac", p.pwl_domain_hi);
        d.get("k_cyc_ref_per_efc", p.k_cyc_ref);
        d.get("k_a", p.k_a);
        d.get("k_b", p.k_b);
        d.get("k_g", p.k_g);
        d.get("k_h", p.k_h);
        d.get("temperature_k", p.temperature_kelvin);
        d.get("temperature_ref_k", p.temperature_ref_kelvin);
        d.get("rate_to_pct", p.rate_to_pct);
        if (d.has("nonlinear")) {
            Reader n = d.child("nonlinear");
            NonlinearCalendarConfig c;
            n.get("k_cal_ref_per_sqrt_h", c.k_cal_ref);
            n.get("activation_energy_j_per_mol", c.activation_energy);
            n.get("alpha", c.alpha);
            n.get("anode_ocp_ref_v", c.anode_ocp_ref);
            n.get("ocp_soe_frac", c.ocp_soe);
            n.get("ocp_v", c.ocp_volts);
            n.finish();
            p.nonlinear = c;
        } else {
            d.child("nonlinear");
        }
        d.finish();
    }
    {
        Reader d = r.child("driving");
        read_gaussian(d.child("pickup_time"), s.driving.pickup_hour, "h");
        read_gaussian(d.child("parking_start_time"), s.driving.parking_start_hour, "h");
        read_gaussian(d.child("daily_distance"), s.driving.daily_distance_km, "km");
        d.finish();
    }
    {
        Reader f = r.child("forecast");
        std::string provider(to_string(s.forecast.provider));
        f.get("provider", provider);
        s.forecast.provider = parse_forecast_kind(provider);
        f.get("external_command", s.forecast.external_command);
        f.finish();
    }
    {
        Reader d = r.child("data");
        d.get("spot_price_csv", s.data.spot_price_csv);
        d.get("household_load_csv", s.data.household_load_csv);
        d.get("irradiance_csv", s.data.irradiance_csv);
        d.get("synthetic_seed", s.data.synthetic_seed);
        d.get("load_scale", s.data.load_scale);
        d.finish();
        s.data.spot_price_csv = resolve(s.data.spot_price_csv, base_dir);
        s.data.household_load_csv = resolve(s.data.household_load_csv, base_dir);
        s.data.irradiance_csv = resolve(s.data.irradiance_csv, base_dir);
    }
    {
        Reader u = r.child("uncertainty");
        u.get("pickup_error_pct", s.uncertainty.pickup_error_pct);
        u.get("p_change_frac", s.uncertainty.p_change);
        u.get("seed", s.uncertainty.seed);
        u.finish();
    }
    r.finish();
    s.validate();
    return s;
}

std::string scenario_to_json(const Scenario& s) {
    json j;
    j["name"] = s.name;
    j["strategy"] = std::string(to_string(s.strategy));
    j["pwl_mode"] = std::string(to_string(s.pwl_mode));
    j["seed"] = s.seed;
    j["simulation_hours"] = s.simulation_hours;
    j["grid_cap_kwh"] = s.grid_cap_kwh;
    j["debug_dump_dir"] = s.debug_dump_dir;
    j["ev"] = {{"usable_capacity_kwh", s.ev.usable_capacity_kwh},
               {"efficiency_km_per_kwh", s.ev.efficiency_km_per_kwh},
               {"max_hourly_energy_kwh", s.ev.max_hourly_energy_kwh},
               {"pickup_soe_frac", s.ev.pickup_soe},
               {"soe_min_frac", s.ev.soe_min},
               {"soe_max_frac", s.ev.soe_max},
               {"safety_soe_frac", s.ev.safety_soe},
               {"initial_soe_frac", s.ev.initial_soe}};
    j["pv"] = {{"enabled", s.pv.enabled},
               {"installed_capacity_kwh", s.pv.installed_capacity_kwh},
               {"max_hourly_output_kwh", s.pv.max_hourly_output_kwh},
               {"annualized_cost_eur_per_kwh_year", s.pv.annualized_cost_eur_per_kwh_year}};
    j["tariff"] = {{"vat_rate_frac", s.tariff.vat_rate},
                   {"variable_fee_eur_per_kwh", s.tariff.variable_fee},
                   {"delivery_fee_eur_per_kwh", s.tariff.delivery_fee},
                   {"network_fee_eur_per_kwh", s.tariff.network_fee},
                   {"monthly_tax_eur", s.tariff.monthly_tax},
                   {"v2g_price_ratio_frac", s.tariff.v2g_price_ratio}};
    j["battery_economics"] = {{"nominal_life_years", s.economics.nominal_life_years},
                              {"replacement_cost_eur_per_kwh", s.economics.replacement_cost_eur_per_kwh},
                              {"residual_frac", s.economics.residual_fraction},
                              {"discount_rate_frac", s.economics.discount_rate},
                              {"eol_capacity_pct", s.economics.eol_capacity_pct}};
    const DegradationParams& p = s.degradation;
    j["degradation"] = {{"pwl_intercept_per_sqrt_h", p.pwl_intercept},
                        {"pwl_first_slope_per_sqrt_h", p.pwl_first_slope},
                        {"pwl_breakpoints_frac", p.pwl_breakpoints},
                        {"pwl_slope_changes_per_sqrt_h", p.pwl_slope_changes},
                        {"pwl_domain_lo_frac", p.pwl_domain_lo},
                        {"pwl_domain_hi_frac", p.pwl_domain_hi},
                        {"k_cyc_ref_per_efc", p.k_cyc_ref},
                        {"k_a", p.k_a},
                        {"k_b", p.k_b},
                        {"k_g", p.k_g},
                        {"k_h", p.k_h},
                        {"temperature_k", p.temperature_kelvin},
                        {"temperature_ref_k", p.temperature_ref_kelvin},
                        {"rate_to_pct", p.rate_to_pct}};
    if (p.nonlinear) {
        const auto& c = *p.nonlinear;
        j["degradation"]["nonlinear"] = {{"k_cal_ref_per_sqrt_h", c.k_cal_ref},
                                         {"activation_energy_j_per_mol", c.activation_energy},
                                         {"alpha", c.alpha},
                                         {"anode_ocp_ref_v", c.anode_ocp_ref},
                                         {"ocp_soe_frac", c.ocp_soe},
                                         {"ocp_v", c.ocp_volts}};
    }
    j["driving"] = {{"pickup_time", gaussian_json(s.driving.pickup_hour, "h")},
                    {"parking_start_time", gaussian_json(s.driving.parking_start_hour, "h")},
                    {"daily_distance", gaussian_json(s.driving.daily_distance_km, "km")}};
    j["forecast"] = {{"provider", std::string(to_string(s.forecast.provider))},
                     {"external_command", s.forecast.external_command}};
    j["data"] = {{"spot_price_csv", s.data.spot_price_csv},
                 {"household_load_csv", s.data.household_load_csv},
                 {"irradiance_csv", s.data.irradiance_csv},
                 {"synthetic_seed", s.data.synthetic_seed},
                 {"load_scale", s.data.load_scale}};
    j["uncertainty"] = {{"pickup_error_pct", s.uncertainty.pickup_error_pct},
                        {"p_change_frac", s.uncertainty.p_change},
                        {"seed", s.uncertainty.seed}};
    return j.dump(2) + "\n";
}

Scenario load_scenario(const fs::path& path) {
    std::ifstream in = open_in(path);
    std::stringstream buf;
    buf << in.rdbuf();
    Scenario s = scenario_from_json(buf.str(), path.parent_path());
    for (const std::string* f : {&s.data.spot_price_csv, &s.data.household_load_csv, &s.data.irradiance_csv}) {
        if (!f->empty() && !fs::exists(*f)) throw ConfigError("scenario: data file not found: " + *f);
    }
    return s;
}

void save_scenario(const fs::path& path, const Scenario& scenario) {
    std::ofstream out = open_out(path);
    out << scenario_to_json(scenario);
}

ResultRow to_row(const sim::SimulationResult& r) {
    return {r.label, std::string(to_string(r.strategy)), r.fc_eur, r.ec_eur - r.er_eur, r.bc_eur,
            r.q_loss_pct, r.q_cal_pct, r.q_cyc_pct, r.efc, r.fixed_eur};
}

void write_results(const fs::path& path, const std::vector<ResultRow>& rows) {
    std::ofstream out = open_out(path);
    out << kResultHeader << '\n';
    for (const ResultRow& r : rows) {
        out << sanitize(r.label) << ',' << r.strategy << ',' << fmt(r.fc_eur) << ',' << fmt(r.ec_minus_er_eur)
            << ',' << fmt(r.bc_eur) << ',' << fmt(r.q_loss_pct) << ',' << fmt(r.q_cal_pct) << ','
            << fmt(r.q_cyc_pct) << ',' << fmt(r.efc) << ',' << fmt(r.fixed_eur) << '\n';
    }
}

std::vector<ResultRow> read_results(const fs::path& path) {
    const Table t(path, kResultHeader);
    std::vector<ResultRow> rows;
    for (std::size_t i = 0; i < t.size(); ++i) {
        ResultRow r;
        r.label = t.text(i, "label");
        r.strategy = t.text(i, "strategy");
        parse_strategy(r.strategy);
        r.fc_eur = t.num(i, "fc_eur");
        r.ec_minus_er_eur = t.num(i, "ec_minus_er_eur");
        r.bc_eur = t.num(i, "bc_eur");
        r.q_loss_pct = t.num(i, "q_loss_pct");
        r.q_cal_pct = t.num(i, "q_cal_pct");
        r.q_cyc_pct = t.num(i, "q_cyc_pct");
        r.efc = t.num(i, "efc");
        r.fixed_eur = t.num(i, "fixed_eur");
        rows.push_back(std::move(r));
    }
    return rows;
}

void write_ledger(const fs::path& path, const std::vector<sim::HourRecord>& records) {
    std::ofstream out = open_out(path);
    out << kLedgerHeader << '\n';
    double running = 0.0;
    for (const sim::HourRecord& r : records) {
        const HourlyFlows& f = r.flows;
        running += r.ledger.ec_eur - r.ledger.er_eur + r.ledger.bc_eur;
        out << r.ledger.hour << ',' << to_string(r.ledger.mode) << ',' << fmt(r.soe_start) << ','
            << fmt(r.soe_end) << ',' << fmt(r.spot_price) << ',' << fmt(r.retail_price) << ','
            << fmt(r.household_load) << ',' << fmt(r.pv_production) << ',' << fmt(f.g2v) << ','
            << fmt(f.g2h) << ',' << fmt(f.v2g) << ',' << fmt(f.v2h) << ',' << fmt(f.pv2v) << ','
            << fmt(f.pv2h) << ',' << fmt(f.pv2g) << ',' << fmt(f.pv2curt) << ',' << fmt(r.dq_cal_pct) << ','
            << fmt(r.dq_cyc_pct) << ',' << fmt(r.efc) << ',' << fmt(r.q_loss_pct) << ','
            << fmt(r.soe_floor) << ',' << (r.relaxed ? 1 : 0) << ',' << fmt(r.ledger.ec_eur) << ','
            << fmt(r.ledger.er_eur) << ',' << fmt(r.ledger.bc_eur) << ',' << fmt(running) << '\n';
    }
}

std::vector<sim::HourRecord> read_ledger(const fs::path& path) {
    const Table t(path, kLedgerHeader);
    std::vector<sim::HourRecord> out;
    out.reserve(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        sim::HourRecord r;
        r.ledger.hour = t.integer(i, "hour");
        const std::string& mode = t.text(i, "mode");
        if (mode == "parked") r.ledger.mode = Mode::Parked;
        else if (mode == "driving") r.ledger.mode = Mode::Driving;
        else if (mode == "idle") r.ledger.mode = Mode::Idle;
        else throw ParseError(path.string(), static_cast<std::int64_t>(i) + 1, "unknown mode " + mode);
        r.soe_start = t.num(i, "soe_start");
        r.soe_end = t.num(i, "soe_end");
        r.spot_price = t.num(i, "spot_eur_per_kwh");
        r.retail_price = t.num(i, "retail_eur_per_kwh");
        r.household_load = t.num(i, "load_kwh");
        r.pv_production = t.num(i, "pv_kwh");
        r.flows.g2v = t.num(i, "g2v_kwh");
        r.flows.g2h = t.num(i, "g2h_kwh");
        r.flows.v2g = t.num(i, "v2g_kwh");
        r.flows.v2h = t.num(i, "v2h_kwh");
        r.flows.pv2v = t.num(i, "pv2v_kwh");
        r.flows.pv2h = t.num(i, "pv2h_kwh");
        r.flows.pv2g = t.num(i, "pv2g_kwh");
        r.flows.pv2curt = t.num(i, "pv2curt_kwh");
        r.dq_cal_pct = t.num(i, "dq_cal_pct");
        r.dq_cyc_pct = t.num(i, "dq_cyc_pct");
        r.efc = t.num(i, "efc");
        r.q_loss_pct = t.num(i, "q_loss_pct");
        r.soe_floor = t.num(i, "soe_floor");
        r.relaxed = t.integer(i, "relaxed") != 0;
        r.ledger.ec_eur = t.num(i, "ec_eur");
        r.ledger.er_eur = t.num(i, "er_eur");
        r.ledger.bc_eur = t.num(i, "bc_eur");
        t.num(i, "fc_running_eur");
        out.push_back(r);
    }
    return out;
}

void write_violations(const fs::path& path, const std::vector<sim::Violation>& violations) {
    std::ofstream out = open_out(path);
    out << "hour,kind,detail\n";
    for (const auto& v : violations) out << v.hour << ',' << v.kind << ',' << sanitize(v.detail) << '\n';
}

std::vector<std::string> replay_ledger(const Scenario& s, const std::vector<sim::HourRecord>& records,
                                       const ResultRow* result, const ReplayTolerances& tol) {
    std::vector<std::string> problems;
    const auto fail = [&](const sim::HourRecord& r, const std::string& what) {
        if (problems.size() < 200) problems.push_back("hour " + std::to_string(r.ledger.hour) + ": " + what);
    };
    const EvSpec& ev = s.ev;
    const double nv = compute_net_present_value(s.economics, ev.usable_capacity_kwh);
    const double eps = tol.energy_kwh;

    double q_prev = 0.0, running = 0.0, ec_er = 0.0, bc = 0.0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const sim::HourRecord& r = records[i];
        const HourlyFlows& f = r.flows;
        if (r.ledger.hour != static_cast<HourIndex>(i)) fail(r, "hour index out of sequence");
        for (double x : {f.g2v, f.g2h, f.v2g, f.v2h, f.pv2v, f.pv2h, f.pv2g, f.pv2curt}) {
            if (x < -eps) {
                fail(r, "negative flow");
                break;
            }
        }
        if (std::abs(f.g2h + f.v2h + f.pv2h - r.household_load) > eps) fail(r, "household balance");
        if (std::abs(f.pv2v + f.pv2h + f.pv2g + f.pv2curt - r.pv_production) > eps) fail(r, "PV balance");
        if (f.pv2v + f.pv2h + f.pv2g > s.pv.max_hourly_output_kwh + eps) fail(r, "PV output limit");
        if (f.g2v + f.g2h > s.grid_cap_kwh + eps) fail(r, "grid capacity");
        if (s.strategy == Strategy::Unidirectional && (f.v2g > eps || f.v2h > eps)) {
            fail(r, "discharge under the unidirectional strategy");
        }

        if (i > 0 && std::abs(r.soe_start - records[i - 1].soe_end) > tol.soe) fail(r, "SoE discontinuity");
        if (i == 0 && std::abs(r.soe_start - ev.initial_soe) > tol.soe) fail(r, "initial SoE");
        switch (r.ledger.mode) {
            case Mode::Parked: {
                if (f.ev_charge() > ev.max_hourly_energy_kwh + eps) fail(r, "charge limit");
                if (f.ev_discharge() > ev.max_hourly_energy_kwh + eps) fail(r, "discharge limit");
                const double next = r.soe_start + (f.ev_charge() - f.ev_discharge()) / ev.usable_capacity_kwh;
                if (std::abs(next - r.soe_end) > tol.soe) fail(r, "SoE dynamics");
                if (r.soe_end > ev.soe_max + tol.soe) fail(r, "SoE above maximum");
                if (!r.relaxed && r.soe_end < ev.soe_min - tol.soe) fail(r, "SoE below minimum");
                if (r.soe_end < r.soe_floor - tol.soe) fail(r, "SoE below the planned floor");
                break;
            }
            case Mode::Driving:
            case Mode::Idle:
                if (f.ev_charge() > eps || f.ev_discharge() > eps) fail(r, "EV flows while away or idle");
                if (r.ledger.mode == Mode::Idle && std::abs(r.soe_end - r.soe_start) > tol.soe) {
                    fail(r, "SoE changed while idle");
                }
                if (r.ledger.mode == Mode::Driving && r.soe_end > r.soe_start + tol.soe) {
                    fail(r, "SoE rose while driving");
                }
                break;
        }

        const double price = retail_price(r.spot_price, s.tariff);
        if (std::abs(price - r.retail_price) > tol.money_eur) fail(r, "retail price");
        const double ec = (f.g2v + f.g2h) * price;
        const double er = (s.tariff.v2g_price_ratio * f.v2g + f.pv2g) * r.spot_price;
        if (std::abs(ec - r.ledger.ec_eur) > tol.money_eur) fail(r, "energy cost");
        if (std::abs(er - r.ledger.er_eur) > tol.money_eur) fail(r, "energy revenue");
        if (r.dq_cal_pct < 0.0 || r.dq_cyc_pct < 0.0) {
            fail(r, "negative degradation increment");
        } else {
            const double b = battery_cost(r.dq_cal_pct + r.dq_cyc_pct, nv, s.economics.eol_capacity_pct);
            if (std::abs(b - r.ledger.bc_eur) > tol.money_eur) fail(r, "battery cost");
        }
        if (std::abs(r.efc - std::abs(r.soe_end - r.soe_start) / 2.0) > tol.soe) fail(r, "EFC increment");
        const double q = q_prev + r.dq_cal_pct + r.dq_cyc_pct;
        if (r.q_loss_pct < q_prev - 1e-12) fail(r, "capacity loss decreased");
        if (std::abs(q - r.q_loss_pct) > 1e-9 * std::max(1.0, q)) fail(r, "cumulative capacity loss");
        q_prev = r.q_loss_pct;
        running += r.ledger.ec_eur - r.ledger.er_eur + r.ledger.bc_eur;
        ec_er += r.ledger.ec_eur - r.ledger.er_eur;
        bc += r.ledger.bc_eur;
    }

    if (result) {
        const double fc = running + result->fixed_eur;
        if (std::abs(fc - result->fc_eur) > tol.final_cost_eur) {
            problems.push_back("final cost: ledger gives " + fmt(fc) + ", result table has " + fmt(result->fc_eur));
        }
        if (std::abs(ec_er - result->ec_minus_er_eur) > tol.final_cost_eur) {
            problems.push_back("net energy cost differs from the result table");
        }
        if (std::abs(bc - result->bc_eur) > tol.final_cost_eur) {
            problems.push_back("battery cost differs from the result table");
        }
        if (!records.empty() && std::abs(records.back().q_loss_pct - result->q_loss_pct) > 1e-9) {
            problems.push_back("capacity loss differs from the result table");
        }
    }
    return problems;
}

double Curve::operator()(double x) const {
    if (soe.empty() || x < soe.front() - 1e-12 || x > soe.back() + 1e-12) {
        throw std::domain_error("curve: soe " + fmt(x) + " outside the sampled range");
    }
    const auto it = std::upper_bound(soe.begin(), soe.end(), x);
    if (it == soe.end()) return value.back();
    if (it == soe.begin()) return value.front();
    const auto i = static_cast<std::size_t>(it - soe.begin());
    const double w = (x - soe[i - 1]) / (soe[i] - soe[i - 1]);
    return value[i - 1] + w * (value[i] - value[i - 1]);
}

Curve load_curve(const fs::path& path) {
    const Table t(path, "soe,value");
    Curve c;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double x = t.num(i, "soe");
        if (!c.soe.empty() && !(x > c.soe.back())) {
            throw ParseError(path.string(), static_cast<std::int64_t>(i) + 1, "soe must be strictly increasing");
        }
        c.soe.push_back(x);
        c.value.push_back(t.num(i, "value"));
    }
    if (c.soe.size() < 2) throw ParseError(path.string(), 0, "need at least two samples");
    return c;
}

void write_pwl(const fs::path& path, const degradation::PwlCalendarModel& m) {
    std::ofstream out = open_out(path);
    write_pwl(out, m);
}

void write_pwl(std::ostream& out, const degradation::PwlCalendarModel& m) {
    out << kPwlHeader << '\n';
    out << "domain_lo," << fmt(m.domain_lo) << ",\n";
    out << "domain_hi," << fmt(m.domain_hi) << ",\n";
    out << "b0,," << fmt(m.intercept) << '\n';
    out << "m0,," << fmt(m.first_slope) << '\n';
    for (std::size_t i = 0; i < m.breakpoints.size(); ++i) {
        out << "dm" << i + 1 << ',' << fmt(m.breakpoints[i]) << ',' << fmt(m.slope_changes[i]) << '\n';
    }
}

degradation::PwlCalendarModel read_pwl(const fs::path& path) {
    const Table t(path, kPwlHeader);
    degradation::PwlCalendarModel m;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const std::string& name = t.text(i, "name");
        if (name == "domain_lo") m.domain_lo = t.num(i, "tau");
        else if (name == "domain_hi") m.domain_hi = t.num(i, "tau");
        else if (name == "b0") m.intercept = t.num(i, "value");
        else if (name == "m0") m.first_slope = t.num(i, "value");
        else if (name.rfind("dm", 0) == 0) {
            m.breakpoints.push_back(t.num(i, "tau"));
            m.slope_changes.push_back(t.num(i, "value"));
        } else {
            throw ParseError(path.string(), static_cast<std::int64_t>(i) + 1, "unknown coefficient " + name);
        }
    }
    return m;
}

namespace {

constexpr std::string_view kSweepHeader =
    "axis,value,by_axis,by_value,seed,label,strategy,fc_eur,ec_minus_er_eur,bc_eur,q_loss_pct,q_cal_pct,"
    "q_cyc_pct,efc,fixed_eur,v2g_kwh,v2h_kwh,relaxed_solves";

constexpr Strategy kAllStrategies[] = {Strategy::Proposed, Strategy::Unidirectional, Strategy::EnergyOnly,
                                       Strategy::DegradationOnly};

std::string axis_column(const std::string& axis) {
    if (axis == "gamma") return "gamma";
    if (axis == "battery") return "capacity_kwh";
    if (axis == "load-scale") return "load_scale";
    if (axis == "pickup-uncertainty") return "pickup_error_pct";
    if (axis == "pv-size") return "pv_capacity_kwh";
    return axis;
}

std::string column_token(Strategy s) {
    std::string t(to_string(s));
    std::replace(t.begin(), t.end(), '-', '_');
    return t;
}

struct Cell {
    std::map<Strategy, const SweepRun*> by_strategy;
};

}  // namespace

void write_sweep_runs(const fs::path& path, const std::vector<SweepRun>& runs) {
    std::ofstream out = open_out(path);
    out << kSweepHeader << '\n';
    for (const SweepRun& r : runs) {
        const ResultRow& x = r.result;
        out << r.axis << ',' << fmt(r.value) << ',' << r.by_axis << ',' << fmt(r.by_value) << ',' << r.seed << ','
            << sanitize(x.label) << ',' << x.strategy << ',' << fmt(x.fc_eur) << ',' << fmt(x.ec_minus_er_eur)
            << ',' << fmt(x.bc_eur) << ',' << fmt(x.q_loss_pct) << ',' << fmt(x.q_cal_pct) << ','
            << fmt(x.q_cyc_pct) << ',' << fmt(x.efc) << ',' << fmt(x.fixed_eur) << ',' << fmt(r.v2g_kwh) << ','
            << fmt(r.v2h_kwh) << ',' << r.relaxed_solves << '\n';
    }
}

std::vector<SweepRun> read_sweep_runs(const fs::path& path) {
    const Table t(path, kSweepHeader);
    std::vector<SweepRun> runs;
    for (std::size_t i = 0; i < t.size(); ++i) {
        SweepRun r;
        r.axis = t.text(i, "axis");
        sim::parse_sweep_axis(r.axis);
        r.value = t.num(i, "value");
        r.by_axis = t.text(i, "by_axis");
        r.by_value = t.num(i, "by_value");
        r.seed = static_cast<std::uint64_t>(t.integer(i, "seed"));
        r.result.label = t.text(i, "label");
        r.result.strategy = t.text(i, "strategy");
        parse_strategy(r.result.strategy);
        r.result.fc_eur = t.num(i, "fc_eur");
        r.result.ec_minus_er_eur = t.num(i, "ec_minus_er_eur");
        r.result.bc_eur = t.num(i, "bc_eur");
        r.result.q_loss_pct = t.num(i, "q_loss_pct");
        r.result.q_cal_pct = t.num(i, "q_cal_pct");
        r.result.q_cyc_pct = t.num(i, "q_cyc_pct");
        r.result.efc = t.num(i, "efc");
        r.result.fixed_eur = t.num(i, "fixed_eur");
        r.v2g_kwh = t.num(i, "v2g_kwh");
        r.v2h_kwh = t.num(i, "v2h_kwh");
        r.relaxed_solves = t.integer(i, "relaxed_solves");
        runs.push_back(std::move(r));
    }
    return runs;
}

void write_sweep_summary(const fs::path& path, const std::vector<SweepRun>& runs) {
    using Key = std::tuple<double, double, std::uint64_t>;
    std::vector<Key> order;
    std::map<Key, Cell> cells;
    std::set<Strategy> present;
    for (const SweepRun& r : runs) {
        const Key k{r.by_value, r.value, r.seed};
        if (!cells.count(k)) order.push_back(k);
        const Strategy s = parse_strategy(r.result.strategy);
        cells[k].by_strategy[s] = &r;
        present.insert(s);
    }
    const bool paired = present.count(Strategy::Proposed) && present.count(Strategy::Unidirectional);
    std::ofstream out = open_out(path);
    const std::string axis = runs.empty() ? "value" : axis_column(runs.front().axis);
    const std::string by = runs.empty() ? "none" : runs.front().by_axis;
    out << axis;
    if (by != "none") out << ',' << axis_column(by);
    out << ",seed";
    for (Strategy s : kAllStrategies) {
        if (!present.count(s)) continue;
        const std::string t = column_token(s);
        out << ",fc_" << t << "_eur,q_loss_" << t << "_pct,efc_" << t;
    }
    if (paired) out << ",economic_gain_eur,additional_degradation_pct";
    out << '\n';
    for (const Key& k : order) {
        const Cell& c = cells[k];
        out << fmt(std::get<1>(k));
        if (by != "none") out << ',' << fmt(std::get<0>(k));
        out << ',' << std::get<2>(k);
        for (Strategy s : kAllStrategies) {
            if (!present.count(s)) continue;
            const auto it = c.by_strategy.find(s);
            if (it == c.by_strategy.end()) {
                out << ",,,";
            } else {
                const ResultRow& x = it->second->result;
                out << ',' << fmt(x.fc_eur) << ',' << fmt(x.q_loss_pct) << ',' << fmt(x.efc);
            }
        }
        if (paired) {
            const auto p = c.by_strategy.find(Strategy::Proposed);
            const auto u = c.by_strategy.find(Strategy::Unidirectional);
            if (p != c.by_strategy.end() && u != c.by_strategy.end()) {
                out << ',' << fmt(u->second->result.fc_eur - p->second->result.fc_eur) << ','
                    << fmt(p->second->result.q_loss_pct - u->second->result.q_loss_pct);
            } else {
                out << ",,";
            }
        }
        out << '\n';
    }
}

std::vector<fs::path> write_report(const std::vector<SweepRun>& runs, const fs::path& out_dir) {
    std::map<std::pair<std::string, std::string>, std::vector<const SweepRun*>> groups;
    for (const SweepRun& r : runs) groups[{r.axis, r.by_axis}].push_back(&r);

    std::vector<fs::path> written;
    for (const auto& [key, members] : groups) {
        const auto& [axis, by] = key;
        // Per (by, value): seed-averaged metrics; paired differences averaged per seed.
        using Point = std::pair<double, double>;
        struct Acc {
            std::map<Strategy, std::vector<const ResultRow*>> rows;
            std::map<std::uint64_t, std::map<Strategy, const ResultRow*>> seeds;
        };
        std::map<Point, Acc> acc;
        for (const SweepRun* r : members) {
            const Strategy s = parse_strategy(r->result.strategy);
            Acc& a = acc[{r->by_value, r->value}];
            a.rows[s].push_back(&r->result);
            a.seeds[r->seed][s] = &r->result;
        }
        const auto mean = [](const std::vector<double>& v) {
            double t = 0.0;
            for (double x : v) t += x;
            return v.empty() ? std::nan("") : t / static_cast<double>(v.size());
        };
        const auto cell = [](double v, int decimals) { return std::isnan(v) ? std::string() : fmt_fixed(v, decimals); };

        std::string name = "fig_" + axis;
        if (by != "none") name += "_by_" + by;
        std::replace(name.begin(), name.end(), '-', '_');
        const fs::path file = out_dir / (name + ".csv");
        std::ofstream out = open_out(file);
        out << axis_column(axis);
        if (by != "none") out << ',' << axis_column(by);
        out << ",fc_proposed_eur,fc_unidirectional_eur,q_cal_proposed_pct,q_cyc_proposed_pct,q_loss_proposed_pct,"
               "economic_gain_eur,additional_degradation_pct,delta_fc_eur,seeds\n";
        for (const auto& [pt, a] : acc) {
            const auto metric = [&](Strategy s, double ResultRow::*field) {
                std::vector<double> v;
                const auto it = a.rows.find(s);
                if (it != a.rows.end()) {
                    for (const ResultRow* r : it->second) v.push_back(r->*field);
                }
                return mean(v);
            };
            std::vector<double> gain, extra, delta;
            for (const auto& [seed, by_s] : a.seeds) {
                const auto p = by_s.find(Strategy::Proposed);
                const auto u = by_s.find(Strategy::Unidirectional);
                if (p != by_s.end() && u != by_s.end()) {
                    gain.push_back(u->second->fc_eur - p->second->fc_eur);
                    extra.push_back(p->second->q_loss_pct - u->second->q_loss_pct);
                }
                if (axis == "pickup-uncertainty" && p != by_s.end()) {
                    const auto base = acc.find({pt.first, 0.0});
                    if (base != acc.end()) {
                        const auto bs = base->second.seeds.find(seed);
                        if (bs != base->second.seeds.end()) {
                            const auto bp = bs->second.find(Strategy::Proposed);
                            if (bp != bs->second.end()) delta.push_back(p->second->fc_eur - bp->second->fc_eur);
                        }
                    }
                }
            }
            out << fmt(pt.second);
            if (by != "none") out << ',' << fmt(pt.first);
            out << ',' << cell(metric(Strategy::Proposed, &ResultRow::fc_eur), 2) << ','
                << cell(metric(Strategy::Unidirectional, &ResultRow::fc_eur), 2) << ','
                << cell(metric(Strategy::Proposed, &ResultRow::q_cal_pct), 4) << ','
                << cell(metric(Strategy::Proposed, &ResultRow::q_cyc_pct), 4) << ','
                << cell(metric(Strategy::Proposed, &ResultRow::q_loss_pct), 4) << ',' << cell(mean(gain), 2) << ','
                << cell(mean(extra), 4) << ',' << cell(mean(delta), 2) << ',' << a.seeds.size() << '\n';
        }
        written.push_back(file);
    }
    return written;
}

}  // namespace agemp::io
