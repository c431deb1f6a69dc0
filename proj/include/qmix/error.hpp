#pragma once

#include <stdexcept>
#include <string>

namespace qmix {

// Bad input to an operation (precondition violated, out-of-range parameter).
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A computation could not be completed (positivity blow-up, underflow,
// degenerate fit). The CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid run configuration. The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace qmix
