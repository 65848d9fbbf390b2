#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace opsim {

enum class ErrorCode {
    invalid_argument,
    invalid_probability,
    degenerate_colocation,
    degenerate_network,
    infinite_mean_interference,
    conditioning_too_rare,
    grid_mismatch,
    out_of_range,
    missing_cell,
    config,
    io,
};

// Single exception type for the library; the code lets the CLI map
// failures onto exit statuses without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

// Raised by estimate_op when the sensor-conditioning bin is hit too rarely.
class ConditioningTooRare : public Error {
public:
    ConditioningTooRare(double acceptance_rate, const std::string& what)
        : Error(ErrorCode::conditioning_too_rare, what), acceptance_rate_(acceptance_rate) {}

    double acceptance_rate() const noexcept { return acceptance_rate_; }

private:
    double acceptance_rate_;
};

// Invalid configuration; `key` is the dotted path of the offending entry.
class ConfigError : public Error {
public:
    ConfigError(std::string key, const std::string& what)
        : Error(ErrorCode::config, what), key_(std::move(key)) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

}  // namespace opsim
