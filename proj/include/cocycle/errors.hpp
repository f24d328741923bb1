#pragma once

#include <stdexcept>
#include <string>

namespace cocycle {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// non-finite input, out-of-range argument, refused densification
struct DomainError : Error {
    using Error::Error;
};

// m * 2^-p too coarse for the requested answer scale
struct PrecisionError : Error {
    using Error::Error;
};

// a precondition of a bound or construction fails
struct HypothesisError : Error {
    using Error::Error;
};

struct ConvergenceError : Error {
    using Error::Error;
};

struct DegenerateInput : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

}  // namespace cocycle
