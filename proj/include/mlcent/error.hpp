#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace mlcent {

/// Base of every error raised by the library. `exit_code()` is the process
/// status the command-line tool reports for the error class.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual int exit_code() const noexcept { return 1; }
};

/// Malformed input text. Carries the 1-based line number when known.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    explicit ParseError(const std::string& what) : Error(what) {}

    std::size_t line() const noexcept { return line_; }
    int exit_code() const noexcept override { return 2; }

private:
    std::size_t line_ = 0;
};

/// Out-of-range index, dimension mismatch, or invalid parameter.
class DomainError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 3; }
};

/// A linear system that is singular or too ill-conditioned to solve.
class ConditioningError : public DomainError {
public:
    ConditioningError(const std::string& what, double condition_estimate)
        : DomainError(what + " (condition estimate " + std::to_string(condition_estimate) + ")"),
          condition_(condition_estimate) {}

    double condition_estimate() const noexcept { return condition_; }

private:
    double condition_;
};

/// An iteration that did not reach its tolerance. `best_estimate()` is the
/// last iterate's value when one exists.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, std::optional<double> best)
        : Error(what), best_(best) {}

    std::optional<double> best_estimate() const noexcept { return best_; }
    int exit_code() const noexcept override { return 4; }

private:
    std::optional<double> best_;
};

/// Non-finite values produced by a numeric kernel.
class NumericError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 4; }
};

/// Dense evaluation requested on a problem above the configured size cap.
class SizeError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 5; }
};

} // namespace mlcent
