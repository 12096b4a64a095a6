#pragma once

#include <stdexcept>
#include <string>

namespace tiltgrid {

/// Bad parameters, malformed input files, incompatible grids.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A computation could not meet its error budget (overflow, error cap, non-monotone data).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace tiltgrid
