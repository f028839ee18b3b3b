#pragma once

/**
 * @file forecast.hpp
 * @brief Forecast-provider contract for household load and irradiance.
 *
 * Providers predict one step ahead from a 24-hour window; multi-step
 * forecasts are built by forecast_recursive, which feeds every prediction
 * back into the window. Output clamping happens once, on the response.
 */

#include <array>
#include <chrono>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "agemp/domain.hpp"
#include "agemp/scenario.hpp"

namespace agemp::forecast {

inline constexpr int kWindow = 24;

enum class Series { HouseholdLoad, SolarIrradiance };

/// "household_load" / "solar_irradiance"; throws std::invalid_argument otherwise.
Series parse_series(std::string_view name);
std::string_view to_string(Series s);

struct ForecastRequest {
    Series series = Series::HouseholdLoad;
    /// Values at hours t-23 .. t; history.back() is the latest measurement.
    std::array<double, kWindow> history{};
    int day_of_year = 0;   ///< 0-based, of the latest history hour
    int hour_of_day = 0;   ///< of the latest history hour
    int horizon = 1;       ///< number of hours after t to predict
    HourIndex origin_hour = 0;  ///< global index of hour t (used by perfect foresight)

    void validate() const;
};

struct ForecastResponse {
    std::vector<double> values;
    std::string provider;
    std::chrono::system_clock::time_point generated_at;
};

/// Input of one recursive step: the window ending just before target_hour.
struct StepInput {
    Series series;
    std::span<const double> window;  ///< kWindow values, oldest first
    int day_of_year;                 ///< of target_hour
    int hour_of_day;                 ///< of target_hour
    HourIndex target_hour;
};

class ProviderError : public std::runtime_error {
public:
    ProviderError(std::string provider, const std::string& what)
        : std::runtime_error(provider + ": " + what), provider_(std::move(provider)) {}
    const std::string& provider() const { return provider_; }

private:
    std::string provider_;
};

class Provider {
public:
    virtual ~Provider() = default;
    virtual std::string_view id() const = 0;
    /// One-step-ahead prediction. Throws ProviderError on failure.
    virtual double predict_one(const StepInput& input) = 0;
};

/// H-step forecast: each prediction is appended to the window for the next
/// step; (day, hour) features advance by one hour per step. Irradiance is
/// clamped to [0, 1] and load to >= 0 on the returned values only.
ForecastResponse forecast_recursive(Provider& provider, const ForecastRequest& request);

/// Clamp applied at the response boundary.
double clamp_output(Series series, double value);

/// Test oracle: returns the ground-truth value at the target hour.
class PerfectForesightProvider final : public Provider {
public:
    /// `truth` is indexed by global hour; indices wrap around its length.
    explicit PerfectForesightProvider(std::vector<double> truth) : truth_(std::move(truth)) {}
    std::string_view id() const override { return "perfect-foresight"; }
    double predict_one(const StepInput& input) override;

private:
    std::vector<double> truth_;
};

/// Last observed value.
class PersistenceProvider final : public Provider {
public:
    std::string_view id() const override { return "persistence"; }
    double predict_one(const StepInput& input) override { return input.window.back(); }
};

/// Value observed 24 hours before the target hour.
class SeasonalNaiveProvider final : public Provider {
public:
    std::string_view id() const override { return "seasonal-naive"; }
    double predict_one(const StepInput& input) override { return input.window.front(); }
};

/// Child process speaking the newline-delimited JSON protocol on its
/// stdin/stdout. Requests are serialised per connection.
class ExternalProcessProvider final : public Provider {
public:
    /// Starts `command` through /bin/sh. Throws ProviderError when it cannot be spawned.
    explicit ExternalProcessProvider(std::string command);
    ~ExternalProcessProvider() override;
    ExternalProcessProvider(const ExternalProcessProvider&) = delete;
    ExternalProcessProvider& operator=(const ExternalProcessProvider&) = delete;

    std::string_view id() const override { return "external"; }
    double predict_one(const StepInput& input) override;

    /// Sends one protocol request and returns its `values` array.
    std::vector<double> request(const ForecastRequest& request);
    /// Sends a raw line and returns the raw response line (protocol tests).
    std::string exchange(const std::string& line);

private:
    std::string command_;
    int pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    std::string buffer_;
    std::mutex mutex_;
};

/// Protocol encoding of a request, without the trailing newline.
std::string encode_request(const ForecastRequest& request);
/// Parses a response line; throws ProviderError("protocol", ...) when malformed
/// or when the line carries an "error" member.
std::vector<double> decode_response(std::string_view line, int expected);

/// Builds the provider configured in `settings`; `truth` feeds perfect foresight.
std::unique_ptr<Provider> make_provider(const ForecastSettings& settings, std::vector<double> truth);

struct MinMaxStats {
    double min = 0.0;
    double max = 0.0;

    /// Stats over a training split. Throws std::invalid_argument when empty.
    static MinMaxStats from(std::span<const double> training);
    bool constant() const { return !(max > min); }
};

/// (v - min) / (max - min); 0 for constant stats. Not clamped.
double normalize(double value, const MinMaxStats& stats);
/// Inverse of normalize; returns min for constant stats.
double denormalize(double value, const MinMaxStats& stats);

}  // namespace agemp::forecast
