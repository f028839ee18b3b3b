// Scripted forecast provider for protocol tests.
//   fake_provider last     values[k] = history.back() + k + 1
//   fake_provider clock    values[k] = 100 * day_of_year + hour_of_day
//   fake_provider error    replies with an error member
//   fake_provider garbage  replies with a line that is not JSON
//   fake_provider short    replies with one value too few
//   fake_provider exit     exits after reading the first request

#include <iostream>
#include <string>

#include <nlohmann/json.hpp>

int main(int argc, char** argv) {
    const std::string mode = argc > 1 ? argv[1] : "last";
    std::string line;
    while (std::getline(std::cin, line)) {
        if (mode == "exit") return 3;
        if (mode == "garbage") {
            std::cout << "values: [1, 2" << std::endl;
            continue;
        }
        if (mode == "error") {
            std::cout << R"({"error": "model not loaded"})" << std::endl;
            continue;
        }
        const auto req = nlohmann::json::parse(line);
        const int horizon = req.at("horizon").get<int>();
        nlohmann::json values = nlohmann::json::array();
        const int n = mode == "short" ? horizon - 1 : horizon;
        for (int k = 0; k < n; ++k) {
            if (mode == "clock") {
                values.push_back(100 * req.at("day_of_year").get<int>() + req.at("hour_of_day").get<int>());
            } else {
                values.push_back(req.at("history").back().get<double>() + k + 1);
            }
        }
        std::cout << nlohmann::json{{"values", values}}.dump() << std::endl;
    }
    return 0;
}
