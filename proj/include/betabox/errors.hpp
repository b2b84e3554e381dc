#pragma once

// Error types thrown by the library. Every condition a caller can
// meaningfully react to gets its own type; all derive from Error so a
// single catch works at the CLI boundary.

#include <stdexcept>
#include <string>

namespace betabox {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Tube lengths must be strictly increasing from outermost to innermost.
struct NonIncreasingLengths : Error {
    using Error::Error;
};

// Safety margins ate the whole length of the outermost tube.
struct NonPositiveEffectiveLength : Error {
    using Error::Error;
};

// A unit-space coordinate fell outside [0, 1].
struct OutOfRangeInput : Error {
    using Error::Error;
};

// A joint vector violates the nesting or deployment chain.
struct InvalidBeta : Error {
    using Error::Error;
};

// Vector or matrix size does not match the tube count.
struct DimensionMismatch : Error {
    using Error::Error;
};

// Sampling method not defined for this tube count.
struct UnsupportedMethod : Error {
    using Error::Error;
};

// A randomized search hit its draw budget without a hit.
struct SearchExhausted : Error {
    using Error::Error;
};

// State or matrix entries left the finite range the solver tolerates.
struct NumericalOverflow : Error {
    using Error::Error;
};

// An iterative numeric routine failed to converge.
struct NoConvergence : Error {
    using Error::Error;
};

// Polygon edges cross each other.
struct SelfIntersecting : Error {
    using Error::Error;
};

// Point cloud has no 2d extent (fewer than 3 distinct points, or collinear).
struct DegenerateCloud : Error {
    using Error::Error;
};

// Config file failed schema validation; message carries the key path.
struct InvalidConfiguration : Error {
    using Error::Error;
};

// Controller gains must be strictly positive.
struct NonPositiveGain : Error {
    using Error::Error;
};

}  // namespace betabox
