#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace rescrb {

// Base for every error raised by the library. Numerical failures derive from
// NumericalError so callers (the CLI in particular) can tell them apart from
// bad input.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

class NotPositiveDefinite : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class NumericalRankError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class SingularityError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class DegenerateData : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class MomentUndefined : public DomainError {
public:
    using DomainError::DomainError;
};

/// Fixed-point iteration ran out of iterations. Keeps the last iterate and
/// the last relative Frobenius change for diagnosis.
class ConvergenceError : public NumericalError {
public:
    ConvergenceError(const std::string& what, Eigen::MatrixXd last_iterate, double residual,
                     int iterations)
        : NumericalError(what),
          last_iterate_(std::move(last_iterate)),
          residual_(residual),
          iterations_(iterations) {}

    const Eigen::MatrixXd& last_iterate() const noexcept { return last_iterate_; }
    double residual() const noexcept { return residual_; }
    int iterations() const noexcept { return iterations_; }

private:
    Eigen::MatrixXd last_iterate_;
    double residual_;
    int iterations_;
};

}  // namespace rescrb
