#pragma once

#include <stdexcept>
#include <string>

namespace qgpr {

// Two families: InputError for malformed arguments and files, NumericError
// for anything the numerics reject (conditioning, factorization, sampling).
// The CLI maps them to exit statuses 2 and 3.

class InputError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

class ParseError : public InputError {
  public:
    ParseError(const std::string &what, long row)
        : InputError(row > 0 ? "row " + std::to_string(row) + ": " + what
                             : what),
          row_(row) {}

    [[nodiscard]] long row() const noexcept { return row_; }

  private:
    long row_;
};

class NumericError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Smallest eigenvalue of a system that must be invertible is <= 0.
class ConditioningError : public NumericError {
  public:
    using NumericError::NumericError;
};

class NotPositiveDefiniteError : public NumericError {
  public:
    NotPositiveDefiniteError(const std::string &what, long pivot)
        : NumericError(what), pivot_(pivot) {}

    [[nodiscard]] long pivot() const noexcept { return pivot_; }

  private:
    long pivot_;
};

class IterationLimitError : public NumericError {
  public:
    IterationLimitError(const std::string &what, double residual)
        : NumericError(what), residual_(residual) {}

    /// Relative residual after the last iteration.
    [[nodiscard]] double residual() const noexcept { return residual_; }

  private:
    double residual_;
};

class ZeroProbabilityError : public NumericError {
  public:
    using NumericError::NumericError;
};

/// A QLA configuration that is invalid for the matrix it is run against.
class ConfigError : public NumericError {
  public:
    using NumericError::NumericError;
};

/// Truncated Neumann series requested for a system where it diverges.
class ExpansionError : public NumericError {
  public:
    using NumericError::NumericError;
};

} // namespace qgpr
