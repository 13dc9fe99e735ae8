#pragma once

#include <stdexcept>
#include <string>

namespace hobake {

/// Invalid user-facing parameter (order, element exponent, config key, ...).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Vector or matrix extents that do not fit the operator they are passed to.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class BasisError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A 1D operator that lacks the centre symmetry the even-odd split needs.
class NotFactorizableError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class InvertedElementError : public std::runtime_error {
public:
    InvertedElementError(std::size_t element, std::size_t point, double det)
        : std::runtime_error("inverted element " + std::to_string(element) + " at quadrature point " +
                             std::to_string(point) + " (det J = " + std::to_string(det) + ")"),
          element_(element), point_(point) {}

    std::size_t element() const noexcept { return element_; }
    std::size_t point() const noexcept { return point_; }

private:
    std::size_t element_;
    std::size_t point_;
};

class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-finite values in the Krylov iteration.
class DivergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or degenerate input dataset (CSV rows, timing samples).
class DataError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A run whose estimated footprint exceeds the configured memory budget.
class ResourceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace hobake
