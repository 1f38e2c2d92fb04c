#pragma once

#include <stdexcept>
#include <string>

namespace sdetest {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// An iterative routine failed to converge. Indicates a library defect.
class NumericFailure : public Error {
public:
    using Error::Error;
};

/// Root bracket for a quantile inversion did not enclose the target.
class BracketFailure : public NumericFailure {
public:
    using NumericFailure::NumericFailure;
};

/// Argument beyond the range representable without exponential scaling.
class OverflowError : public Error {
public:
    using Error::Error;
};

/// Euler-Maruyama state became non-finite.
class SimulationDiverged : public Error {
public:
    SimulationDiverged(const std::string& what, double time)
        : Error(what), time_(time) {}
    double time() const noexcept { return time_; }

private:
    double time_;
};

/// Least-squares design Σ(∫f)² vanished on the fit window.
class ZeroDesignError : public Error {
public:
    using Error::Error;
};

/// Sample windows whose length or parity does not fit the procedure.
class LengthError : public Error {
public:
    using Error::Error;
};

/// Invalid or inconsistent configuration (missing parameters, bad flags).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Malformed input data (CSV rows, non-finite values).
class DataError : public Error {
public:
    DataError(const std::string& what, long row = -1) : Error(what), row_(row) {}
    long row() const noexcept { return row_; }

private:
    long row_;
};

}  // namespace sdetest
