#pragma once

#include <stdexcept>
#include <string>

namespace curvete {

// Error taxonomy shared by every module. The CLI maps these onto exit codes:
// validation-class errors -> 2, DependencyError -> 3, NumericalError -> 4.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad data handed to an operation (out-of-range label, empty sample set, ...).
struct InputError : Error {
    using Error::Error;
};

// Structurally invalid configuration (incompatible layer shapes, bad spec).
struct ConfigError : Error {
    using Error::Error;
};

// Operation called out of order (e.g. backward before forward).
struct StateError : Error {
    using Error::Error;
};

// Non-finite values where finite ones are required.
struct NumericalError : Error {
    using Error::Error;
};

// Malformed external file (PGM, checkpoint, feature matrix, ...).
struct ParseError : Error {
    using Error::Error;
};

// Manifest schema violation; message carries the offending field path.
struct ValidationError : Error {
    using Error::Error;
};

// A command needs an artifact another command has not produced yet.
struct DependencyError : Error {
    using Error::Error;
};

}  // namespace curvete
