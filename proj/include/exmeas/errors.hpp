#pragma once

#include <stdexcept>
#include <string>

namespace exmeas {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed or inconsistent model configuration (CLI exit code 2).
struct ConfigError : Error {
    using Error::Error;
};

// A resource guard tripped: latent point cap, atom cap, or an absurd
// Poisson area request (CLI exit code 3).
struct ResourceLimitError : Error {
    using Error::Error;
};

// Evaluation-time domain error in a user function: log of a nonpositive
// value, division by zero, unbound variable, NaN result.
struct EvalError : Error {
    using Error::Error;
};

// An integrand or weight probed negative where nonnegativity is required.
struct NegativeValueError : Error {
    using Error::Error;
};

}  // namespace exmeas
