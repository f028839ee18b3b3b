#include "agemp/forecast.hpp"

#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstring>

#include <nlohmann/json.hpp>

namespace agemp::forecast {

namespace {

constexpr int kResponseTimeoutMs = 30000;

}  // namespace

Series parse_series(std::string_view name) {
    if (name == "household_load") return Series::HouseholdLoad;
    if (name == "solar_irradiance") return Series::SolarIrradiance;
    throw std::invalid_argument("unknown forecast series: " + std::string(name));
}

std::string_view to_string(Series s) {
    return s == Series::HouseholdLoad ? "household_load" : "solar_irradiance";
}

void ForecastRequest::validate() const {
    if (horizon < 1) throw std::invalid_argument("ForecastRequest: horizon must be >= 1");
    if (hour_of_day < 0 || hour_of_day > 23) {
        throw std::invalid_argument("ForecastRequest: hour_of_day outside 0..23");
    }
    if (day_of_year < 0 || day_of_year > 365) {
        throw std::invalid_argument("ForecastRequest: day_of_year outside 0..365");
    }
    for (double v : history) {
        if (!std::isfinite(v)) throw std::invalid_argument("ForecastRequest: non-finite history value");
    }
}

double clamp_output(Series series, double value) {
    if (series == Series::SolarIrradiance) return std::clamp(value, 0.0, 1.0);
    return std::max(0.0, value);
}

ForecastResponse forecast_recursive(Provider& provider, const ForecastRequest& request) {
    request.validate();
    std::vector<double> window(request.history.begin(), request.history.end());
    window.reserve(kWindow + static_cast<std::size_t>(request.horizon));
    ForecastResponse out;
    out.provider = std::string(provider.id());
    out.values.reserve(static_cast<std::size_t>(request.horizon));
    for (int h = 1; h <= request.horizon; ++h) {
        const HourIndex target = request.origin_hour + h;
        // Features are advanced from the request, not from the global index,
        // so requests built from explicit (day, hour) stay self-consistent.
        const int hours = request.hour_of_day + h;
        const StepInput in{request.series,
                           std::span<const double>(window.data() + (h - 1), kWindow),
                           (request.day_of_year + hours / kHoursPerDay) % 365,
                           hours % kHoursPerDay, target};
        const double v = provider.predict_one(in);
        if (!std::isfinite(v)) throw ProviderError(out.provider, "non-finite prediction");
        window.push_back(v);
        out.values.push_back(clamp_output(request.series, v));
    }
    out.generated_at = std::chrono::system_clock::now();
    return out;
}

double PerfectForesightProvider::predict_one(const StepInput& input) {
    if (truth_.empty()) throw ProviderError("perfect-foresight", "no ground truth series");
    const auto n = static_cast<HourIndex>(truth_.size());
    const HourIndex i = ((input.target_hour % n) + n) % n;
    return truth_[static_cast<std::size_t>(i)];
}

std::string encode_request(const ForecastRequest& r) {
    nlohmann::json j;
    j["series"] = std::string(to_string(r.series));
    j["history"] = r.history;
    j["day_of_year"] = r.day_of_year;
    j["hour_of_day"] = r.hour_of_day;
    j["horizon"] = r.horizon;
    return j.dump();
}

std::vector<double> decode_response(std::string_view line, int expected) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw ProviderError("protocol", std::string("malformed response: ") + e.what());
    }
    if (!j.is_object()) throw ProviderError("protocol", "response is not an object");
    if (j.contains("error")) throw ProviderError("protocol", "provider error: " + j["error"].dump());
    if (!j.contains("values") || !j["values"].is_array()) {
        throw ProviderError("protocol", "response lacks a values array");
    }
    std::vector<double> values;
    for (const auto& v : j["values"]) {
        if (!v.is_number()) throw ProviderError("protocol", "non-numeric value in response");
        values.push_back(v.get<double>());
    }
    if (static_cast<int>(values.size()) != expected) {
        throw ProviderError("protocol", "expected " + std::to_string(expected) + " values, got " +
                                            std::to_string(values.size()));
    }
    return values;
}

ExternalProcessProvider::ExternalProcessProvider(std::string command) : command_(std::move(command)) {
    int fds[2];
    if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, fds) != 0) {
        throw ProviderError("external", std::string("socketpair: ") + std::strerror(errno));
    }
    const pid_t pid = ::fork();
    if (pid < 0) {
        ::close(fds[0]);
        ::close(fds[1]);
        throw ProviderError("external", std::string("fork: ") + std::strerror(errno));
    }
    if (pid == 0) {
        ::dup2(fds[1], STDIN_FILENO);
        ::dup2(fds[1], STDOUT_FILENO);
        ::execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
        ::_exit(127);
    }
    ::close(fds[1]);
    pid_ = pid;
    to_child_ = fds[0];
    from_child_ = fds[0];
}

ExternalProcessProvider::~ExternalProcessProvider() {
    if (to_child_ >= 0) {
        ::shutdown(to_child_, SHUT_WR);
        ::close(to_child_);
    }
    if (pid_ > 0) {
        int status = 0;
        for (int i = 0; i < 50; ++i) {
            if (::waitpid(pid_, &status, WNOHANG) != 0) return;
            ::usleep(10000);
        }
        ::kill(pid_, SIGKILL);
        ::waitpid(pid_, &status, 0);
    }
}

std::string ExternalProcessProvider::exchange(const std::string& line) {
    std::lock_guard lock(mutex_);
    std::string msg = line;
    msg.push_back('\n');
    std::size_t sent = 0;
    while (sent < msg.size()) {
        const ssize_t n = ::send(to_child_, msg.data() + sent, msg.size() - sent, MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw ProviderError("external", std::string("write failed: ") + std::strerror(errno));
        }
        sent += static_cast<std::size_t>(n);
    }
    for (;;) {
        const auto nl = buffer_.find('\n');
        if (nl != std::string::npos) {
            std::string out = buffer_.substr(0, nl);
            buffer_.erase(0, nl + 1);
            return out;
        }
        pollfd pfd{from_child_, POLLIN, 0};
        const int ready = ::poll(&pfd, 1, kResponseTimeoutMs);
        if (ready == 0) throw ProviderError("external", "timed out waiting for a response");
        if (ready < 0) {
            if (errno == EINTR) continue;
            throw ProviderError("external", std::string("poll failed: ") + std::strerror(errno));
        }
        char chunk[4096];
        const ssize_t n = ::recv(from_child_, chunk, sizeof chunk, 0);
        if (n == 0) throw ProviderError("external", "provider process closed the stream");
        if (n < 0) {
            if (errno == EINTR) continue;
            throw ProviderError("external", std::string("read failed: ") + std::strerror(errno));
        }
        buffer_.append(chunk, static_cast<std::size_t>(n));
    }
}

std::vector<double> ExternalProcessProvider::request(const ForecastRequest& request) {
    request.validate();
    const std::string reply = exchange(encode_request(request));
    try {
        return decode_response(reply, request.horizon);
    } catch (const ProviderError& e) {
        throw ProviderError("external", e.what());
    }
}

double ExternalProcessProvider::predict_one(const StepInput& input) {
    ForecastRequest r;
    r.series = input.series;
    std::copy_n(input.window.begin(), kWindow, r.history.begin());
    // The request describes the latest history hour, one before the target.
    const HourIndex last = input.target_hour - 1;
    r.hour_of_day = (input.hour_of_day + kHoursPerDay - 1) % kHoursPerDay;
    r.day_of_year = input.hour_of_day == 0 ? (input.day_of_year + 364) % 365 : input.day_of_year;
    r.horizon = 1;
    r.origin_hour = last;
    return request(r).front();
}

std::unique_ptr<Provider> make_provider(const ForecastSettings& settings, std::vector<double> truth) {
    switch (settings.provider) {
        case ForecastKind::PerfectForesight:
            return std::make_unique<PerfectForesightProvider>(std::move(truth));
        case ForecastKind::Persistence: return std::make_unique<PersistenceProvider>();
        case ForecastKind::SeasonalNaive: return std::make_unique<SeasonalNaiveProvider>();
        case ForecastKind::External:
            return std::make_unique<ExternalProcessProvider>(settings.external_command);
    }
    throw std::invalid_argument("make_provider: unknown provider");
}

MinMaxStats MinMaxStats::from(std::span<const double> training) {
    if (training.empty()) throw std::invalid_argument("MinMaxStats: empty training split");
    const auto [lo, hi] = std::minmax_element(training.begin(), training.end());
    return {*lo, *hi};
}

double normalize(double value, const MinMaxStats& stats) {
    if (stats.constant()) return 0.0;
    return (value - stats.min) / (stats.max - stats.min);
}

double denormalize(double value, const MinMaxStats& stats) {
    if (stats.constant()) return stats.min;
    return value * (stats.max - stats.min) + stats.min;
}

}  // namespace agemp::forecast
