#pragma once

#include <stdexcept>
#include <string>

namespace bklab {

// Bad input, violated precondition, or malformed file. The CLI maps these to exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class GridMismatch : public ConfigError {
public:
    using ConfigError::ConfigError;
};

// tau exceeds the aliasing guard pi*N/(8 L^2) of the grid.
class GuardViolation : public ConfigError {
public:
    using ConfigError::ConfigError;
};

// A computation that was set up correctly but failed. Exit code 3.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DivergenceError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class SingularSystem : public NumericalError {
public:
    using NumericalError::NumericalError;
};

} // namespace bklab
