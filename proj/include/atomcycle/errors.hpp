#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace atomcycle {

/// Parameters outside the domain of a formula (e.g. zero cycle loss).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// An index or coordinate outside the lattice.
class RangeError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// The simulated true state contradicts what an operation expects.
class StateError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Malformed configuration: unknown keys, wrong types, inconsistent settings.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Not enough data for a statistic (too few cycles, empty window).
class InsufficientDataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file, carrying the 1-based line and column of the problem.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, std::size_t column, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
          line_(line),
          column_(column),
          message_(what) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }
    /// Description without the position prefix.
    const std::string& message() const noexcept { return message_; }

private:
    std::size_t line_;
    std::size_t column_;
    std::string message_;
};

/// File could not be opened, read or written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace atomcycle
