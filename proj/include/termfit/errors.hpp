#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace termfit {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numeric argument outside its valid domain (tau <= 0, lambda <= 0, k < 0, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Vector/matrix length mismatch.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Fewer observations than required to estimate the model (n <= p).
class InsufficientDataError : public Error {
public:
    using Error::Error;
};

/// Design matrix is rank deficient. Carries the column indices most
/// strongly implicated in the dependency.
class SingularDesignError : public Error {
public:
    SingularDesignError(const std::string& msg, std::vector<int> cols)
        : Error(msg), columns(std::move(cols)) {}
    std::vector<int> columns;
};

/// A column of the design is identically zero.
class DegenerateColumnError : public Error {
public:
    using Error::Error;
};

/// Operation not defined for the requested arguments (e.g. raising the intercept).
class UnsupportedOperationError : public Error {
public:
    using Error::Error;
};

/// Raising cannot change the design because the auxiliary residual is zero.
class UnmitigableCollinearityError : public Error {
public:
    using Error::Error;
};

/// Model configuration invalid (missing second shape parameter, bad grid, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Grid search could not produce a usable fit on any grid point.
class CalibrationError : public Error {
public:
    using Error::Error;
};

/// Malformed input file. Line numbers are 1-based; 0 means not line specific.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& msg, std::size_t line_no = 0)
        : Error(line_no ? "line " + std::to_string(line_no) + ": " + msg : msg),
          line(line_no) {}
    std::size_t line;
};

/// Missing tenor inside a range that must be contiguous.
class CurveGapError : public Error {
public:
    using Error::Error;
};

/// Bootstrapped discount factor outside (0, 2).
class ArbitrageError : public Error {
public:
    using Error::Error;
};

/// Requested metric is undefined on the given data (no holdout days, ...).
class UndefinedMetricError : public Error {
public:
    using Error::Error;
};

/// Test statistic undefined because the estimated variance is zero.
class DegenerateTestError : public Error {
public:
    using Error::Error;
};

}  // namespace termfit
