#pragma once

#include <stdexcept>
#include <string>

namespace squeezelab {

/// Bad user input: dimensions, orders, grids, tolerances.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The exponential action did not reach the requested tolerance within its
/// iteration budget. Carries the last local error estimate.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// A configured degree/term/size budget was exceeded.
class ResourceError : public std::runtime_error {
public:
    ResourceError(const std::string& what, std::string parameter)
        : std::runtime_error(what), parameter_(std::move(parameter)) {}

    const std::string& parameter() const noexcept { return parameter_; }

private:
    std::string parameter_;
};

}  // namespace squeezelab
