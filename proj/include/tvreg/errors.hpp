#pragma once

#include <stdexcept>
#include <string>

namespace tvreg {

/// Argument outside the admissible parameter range (mu <= 1, eps <= 0, ...).
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Query outside the domain of a function, e.g. |q| >= lambda_inf for the
/// inverse derivative or the conjugate.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Two arrays that should live on the same grid do not.
class GridMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An iterative procedure (numerical limit, root finder, Newton) stopped
/// before reaching its tolerance.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dual variable does not satisfy sigma(0) = sigma(1) = 0.
class BoundaryConditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Requested a jump-regime quantity for a density with omega_inf = +inf.
class NoJumpRegime : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Malformed input file (CSV, key=value config).
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace tvreg
