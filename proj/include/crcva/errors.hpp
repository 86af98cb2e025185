#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace crcva {

/// Argument outside the mathematical domain of an operation (negative time, T < t, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A calibration or bootstrap could not produce a valid model.
class CalibrationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration or input data. Carries every violation found, not just the first.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> problems)
        : std::runtime_error(join(problems)), problems_(std::move(problems)) {}
    explicit ConfigError(const std::string& problem)
        : ConfigError(std::vector<std::string>{problem}) {}

    const std::vector<std::string>& problems() const noexcept { return problems_; }

private:
    static std::string join(const std::vector<std::string>& items) {
        std::string out;
        for (const auto& item : items) {
            if (!out.empty()) out += "; ";
            out += item;
        }
        return out;
    }

    std::vector<std::string> problems_;
};

/// Monte Carlo configuration or runtime failure.
class SimulationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace crcva
