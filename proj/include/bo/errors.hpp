#pragma once

#include <stdexcept>
#include <string>

namespace bo {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Denominator vanishes within tolerance of the real axis.
struct RealPole : Error {
    using Error::Error;
};

/// Numerator degree too large for a decaying rational function.
struct DegreeViolation : Error {
    using Error::Error;
};

/// Evaluation requested at (or too close to) a pole.
struct PoleHit : Error {
    using Error::Error;
};

/// Input does not decay at infinity.
struct NonDecaying : Error {
    using Error::Error;
};

/// Two poles that must stay distinct collided beyond the identification threshold.
struct PoleCollision : Error {
    using Error::Error;
};

/// Root iteration failed to reach the residual target.
struct NoConvergence : Error {
    using Error::Error;
};

/// Characteristic polynomial lost its expected degree.
struct DegreeCollapse : Error {
    using Error::Error;
};

/// Dense solve hit a numerically singular matrix.
struct SingularSystem : Error {
    using Error::Error;
};

/// Cramer system is degenerate (root collision or root at a pole).
struct DegenerateSystem : Error {
    using Error::Error;
};

/// Simulated field norm exploded.
struct BlowUp : Error {
    using Error::Error;
};

/// Invalid run configuration.
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace bo
