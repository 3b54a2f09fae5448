#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace covertlab {

// Base class for all toolkit errors. Standard domain/range violations
// (empty input to entropy, out-of-range scheme parameters) use
// std::domain_error / std::out_of_range directly.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Carrier trace cannot hold the requested payload.
class CapacityError : public Error {
public:
    using Error::Error;
};

// Malformed channel/trapdoor/profile configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Trapdoor budget violated (T_s >= T_m) or similar hard constraint.
// A constraint violation is a configuration error, so catch sites may
// handle either level.
class ConstraintError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

// Text input (trace or profile file) could not be parsed.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, std::size_t line = 0)
        : Error(line ? msg + " (line " + std::to_string(line) + ")" : msg),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_ = 0;
};

// Packet or file content violates the field model.
class ValidationError : public Error {
public:
    ValidationError(const std::string& msg, std::size_t line = 0)
        : Error(line ? msg + " (line " + std::to_string(line) + ")" : msg),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_ = 0;
};

// Not enough data to learn a baseline profile.
class TrainingError : public Error {
public:
    using Error::Error;
};

// Filesystem failure (open/read/write).
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace covertlab
