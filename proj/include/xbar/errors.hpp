#pragma once

#include <stdexcept>
#include <string>

namespace xbar {

/// A parameter record or configuration value violates a documented invariant.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed configuration text. Line and column are 1-based; 0 means unknown.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, int line, int column)
        : std::runtime_error(what), line_(line), column_(column) {}

    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

private:
    int line_;
    int column_;
};

class SolverError : public std::runtime_error {
public:
    enum class Kind { NonConvergence, SingularSystem, ScheduleGap };

    SolverError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

inline const char* to_string(SolverError::Kind k) {
    switch (k) {
    case SolverError::Kind::NonConvergence: return "NonConvergence";
    case SolverError::Kind::SingularSystem: return "SingularSystem";
    case SolverError::Kind::ScheduleGap: return "ScheduleGap";
    }
    return "unknown";
}

}  // namespace xbar
