#pragma once

#include <stdexcept>
#include <string>

namespace ldmimo {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A root-finder or iterative kernel did not meet its tolerance.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double residual)
        : std::runtime_error(what + " (residual " + std::to_string(residual) + ")"),
          residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// Too few Monte Carlo trials satisfied a conditioning event.
class InsufficientAcceptance : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ldmimo
