#pragma once

#include <stdexcept>
#include <string>

namespace degenwave {

/// Raised when inputs violate an operation's domain (bad weight, bad grid, ...).
class DomainError : public std::invalid_argument {
public:
    explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

/// Raised when a numerical procedure fails (bracket not found, singular solve, no convergence).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace degenwave
