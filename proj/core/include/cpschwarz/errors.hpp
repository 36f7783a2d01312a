#pragma once

#include <limits>
#include <stdexcept>
#include <string>

namespace cps {

/// Root of the library's exception hierarchy.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid user-supplied configuration (bad curve name, inconsistent
/// intervals, tube wider than the reach of the curve, ...).  The command
/// line tool maps these to exit status 2.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Runtime numerical failure (non-convergence, ambiguous projection,
/// degenerate parametrization, ...).  Maps to exit status 3.
class NumericalError : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

/// Closest-point query hit a point whose projection onto the curve is
/// ambiguous (several branches at nearly equal distance).  Carries that
/// distance so callers can tell whether the point matters to them.
class NonUniqueClosestPoint : public NumericalError {
public:
    explicit NonUniqueClosestPoint(const std::string& what,
                                   double distance = std::numeric_limits<double>::quiet_NaN())
        : NumericalError(what), distance(distance) {}

    double distance;
};

/// Requested tube radius reaches beyond the curve's minimal radius of
/// curvature, so closest points inside the tube would not be unique.
class TubeTooWide : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class InvalidOverlap : public ConfigError {
public:
    using ConfigError::ConfigError;
};

/// A subdomain has no interior unknowns left after carving out its
/// artificial boundary layer.
class EmptySubdomain : public ConfigError {
public:
    using ConfigError::ConfigError;
};

/// Iterative solver failed to reach the requested tolerance.
class NoConvergence : public NumericalError {
public:
    NoConvergence(std::string what, int iterations, double residual)
        : NumericalError(std::move(what)), iterations(iterations), residual(residual) {}

    int iterations;
    double residual;
};

}  // namespace cps
