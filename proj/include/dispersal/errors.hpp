#pragma once

#include <stdexcept>
#include <string>

namespace dispersal {

/// Base class for all failures raised by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// An iterative solver exhausted its budget before reaching tolerance.
class NonConvergence : public Error {
public:
    using Error::Error;
};

/// A Newton iterate left the positive cone and damping could not recover.
class NegativeSolution : public Error {
public:
    using Error::Error;
};

/// The existence criterion failed: the principal eigenvalue of the
/// linearization at zero is non-negative, so no positive steady state exists.
class NonExistence : public Error {
public:
    using Error::Error;
};

/// Time integration exceeded the blow-up guard (bad dt).
class BlowUp : public Error {
public:
    using Error::Error;
};

/// A field that must stay positive acquired a non-positive entry.
class NonPositive : public Error {
public:
    using Error::Error;
};

/// Two fields or states live on incompatible grids.
class GridMismatch : public Error {
public:
    using Error::Error;
};

/// An operation received an identically-zero field.
class ZeroField : public Error {
public:
    using Error::Error;
};

/// Argument outside the supported range of a special-function evaluation.
class OutOfRange : public Error {
public:
    using Error::Error;
};

/// Root bracketing failed (signals a broken function evaluation).
class BracketFailure : public Error {
public:
    using Error::Error;
};

/// The trait-selection gradient must be positive to define the layer profile.
class InvalidA1 : public Error {
public:
    using Error::Error;
};

/// The resolved tail is too short to fit a decay rate.
class InsufficientTail : public Error {
public:
    using Error::Error;
};

/// Not enough sweep points to fit scaling laws.
class InsufficientData : public Error {
public:
    using Error::Error;
};

/// A computed state violates one of its declared invariants.
class InvariantViolation : public Error {
public:
    using Error::Error;
};

/// Experiment configuration failed schema validation; message carries the
/// offending field path.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Filesystem failure while reading or writing experiment artifacts.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace dispersal
