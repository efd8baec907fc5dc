#pragma once

#include <stdexcept>
#include <string>

namespace hypvar {

/// A sampler or mark-enumeration request exceeded its configured budget.
class BudgetError : public std::runtime_error {
public:
    BudgetError(const std::string& what, double expected_count)
        : std::runtime_error(what), expected_count_(expected_count) {}

    /// The expected (or counted) size that triggered the refusal.
    double expected_count() const noexcept { return expected_count_; }

private:
    double expected_count_;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed external spectrum file.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line)
        : std::runtime_error(what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

} // namespace hypvar
