#pragma once

#include <stdexcept>
#include <string>

namespace stwall {

/// Invalid input to a model (bad geometry, out-of-range parameter).
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Lookup of a name that is not present (materials, scenario keys).
class NotFound : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numerical failure: instability, divergence, non-finite results.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace stwall
