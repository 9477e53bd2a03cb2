#pragma once

#include <stdexcept>
#include <string>

namespace trajphase {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input: mismatched dimensions, channel counts, bad parameters.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A schedule was queried outside the interval it covers.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Numerical failure during an integration (carries the failing step).
class NumericError : public Error {
public:
    NumericError(const std::string& what, long step = -1) : Error(what), step_(step) {}
    long step() const { return step_; }

private:
    long step_;
};

class IntegrationError : public NumericError {
public:
    using NumericError::NumericError;
};

class TotalDecayError : public NumericError {
public:
    using NumericError::NumericError;
};

class StepSizeError : public NumericError {
public:
    using NumericError::NumericError;
};

/// The overlap <psi0|psi(t)> passed through zero, so its argument is not
/// continuously defined. Thrown only in strict mode.
class BranchTrackingError : public NumericError {
public:
    BranchTrackingError(const std::string& what, double crossing_time)
        : NumericError(what), crossing_time_(crossing_time) {}
    double crossing_time() const { return crossing_time_; }

private:
    double crossing_time_;
};

}  // namespace trajphase
