#pragma once

#include <stdexcept>
#include <string>

namespace yosida {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Precondition violated by the caller (bad exponent, mismatched grids, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// An iterative solver did not reach its tolerance.
class SolverError : public Error {
public:
    SolverError(const std::string& what, double residual)
        : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// Bisection bracket could not be expanded to enclose a root.
class BracketError : public Error {
public:
    using Error::Error;
};

inline void require(bool ok, const std::string& msg) {
    if (!ok) throw InvalidArgument(msg);
}

}  // namespace yosida
