#pragma once

#include <stdexcept>
#include <string>

namespace spmarket {

/// Argument outside the domain of a utility, cost, bid or price function.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Market parameters that do not describe a valid instance (e.g. M*d0 >= N*kappa0).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A supplier is pivotal (RSI <= 1), so the bidding game has no Nash equilibrium.
class PivotalSupplierError : public std::runtime_error {
public:
    PivotalSupplierError(const std::string& what, double rsi)
        : std::runtime_error(what), rsi_(rsi) {}

    double rsi() const noexcept { return rsi_; }

private:
    double rsi_;
};

/// No sign change of the excess-demand function was found while expanding the price bracket.
class BracketError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IterationLimitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operation called on an input it is not defined for (e.g. unboundedness test on a
/// non-pivotal market).
class PreconditionError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace spmarket
