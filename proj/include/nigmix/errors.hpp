#pragma once

#include <stdexcept>
#include <string>

namespace nigmix {

/// Argument outside the mathematical domain of a function.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A moment that does not exist for the given parameters (e.g. E[1/x] of a
/// gamma with shape <= 1).
class UndefinedMoment : public DomainError {
public:
    using DomainError::DomainError;
};

/// Invalid user-facing configuration or input shape.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Loss of positive definiteness or non-finite values during fitting.
class NumericalBreakdown : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Every cluster fell below the pruning threshold.
class DegenerateFit : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace nigmix
