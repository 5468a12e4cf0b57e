#pragma once

#include <stdexcept>
#include <string>

namespace egan {

// Invalid sizes, hyperparameters or config-file contents.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Matrix / network dimension mismatch.
class ShapeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An API called out of order (stale cache, stepping a finished episode, ...).
class UsageError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Malformed input file. The message carries the offending line number.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace egan
