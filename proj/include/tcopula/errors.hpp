#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tcopula {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Vector/matrix dimensions that do not agree.
class ShapeError : public Error {
public:
    using Error::Error;
};

class UnsupportedError : public Error {
public:
    using Error::Error;
};

/// Correlation with |rho| >= 1 where a strictly positive definite structure is required.
class DegenerateCorrelationError : public Error {
public:
    using Error::Error;
};

/// Statistical estimation impossible on the supplied data (constant columns, all ties, ...).
class EstimationError : public Error {
public:
    using Error::Error;
};

/// Restricted model has a strictly larger likelihood than the model it is nested in.
class NestingError : public Error {
public:
    using Error::Error;
};

/// Base for failures of a numerical procedure on otherwise valid input.
class NumericalError : public Error {
public:
    using Error::Error;
};

class QuadratureError : public NumericalError {
public:
    QuadratureError(const std::string& what, double best_estimate, double abs_error,
                    std::size_t evaluations)
        : NumericalError(what), best_estimate_(best_estimate), abs_error_(abs_error),
          evaluations_(evaluations) {}

    double best_estimate() const noexcept { return best_estimate_; }
    double abs_error_estimate() const noexcept { return abs_error_; }
    std::size_t evaluations() const noexcept { return evaluations_; }

private:
    double best_estimate_;
    double abs_error_;
    std::size_t evaluations_;
};

class OptimizerError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class NumericalDegeneracyError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace tcopula
