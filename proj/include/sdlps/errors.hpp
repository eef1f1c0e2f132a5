#pragma once

#include <stdexcept>
#include <string>

namespace sdlps {

/// Bad user-supplied value (negative rate, unreachable SCV, malformed config field).
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// The offered load cannot be stabilized by the requested control.
class InstabilityError : public std::runtime_error {
public:
    explicit InstabilityError(const std::string& what) : std::runtime_error(what) {}
};

/// A numerical routine failed to meet its contract (non-integrable density,
/// sign anomaly in an ODE solve, iteration cap exceeded).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Config file cannot be parsed or fails schema checks.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace sdlps
