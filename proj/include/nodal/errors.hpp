#pragma once

#include <stdexcept>
#include <string>

namespace nodal {

// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Profile or config parameters outside their admissible ranges.
class InvalidSpecError : public Error {
public:
    using Error::Error;
};

// Evaluation outside the open interval where a function is defined.
class DomainError : public Error {
public:
    using Error::Error;
};

// A profile that fails a structural requirement (e.g. no sign change).
class ProfileInvalidError : public Error {
public:
    using Error::Error;
};

// Inconsistent or unusable run parameters (step-off radius, directions, ...).
class ConfigurationError : public Error {
public:
    using Error::Error;
};

// Integration failures carry the last good state so callers can diagnose.
struct LastState {
    double t = 0.0;
    double u = 0.0;
    double up = 0.0;
};

class IntegrationError : public Error {
public:
    IntegrationError(const std::string& msg, LastState last) : Error(msg), last_state(last) {}
    LastState last_state;
};

// Step size underflow: the equation became too stiff or the solution blew up.
class StiffnessError : public IntegrationError {
public:
    using IntegrationError::IntegrationError;
};

// Non-finite state encountered.
class DivergenceError : public IntegrationError {
public:
    using IntegrationError::IntegrationError;
};

// Angle within tolerance of an odd multiple of pi/2: zero count undefined.
class AmbiguousAngleError : public Error {
public:
    using Error::Error;
};

// A search target was not attained (exit angle, matching root, ...).
class NotFoundError : public Error {
public:
    using Error::Error;
};

// The subcriticality gate failed; carries the computed threshold.
class PreconditionError : public Error {
public:
    PreconditionError(const std::string& msg, double p_threshold)
        : Error(msg), p_gate(p_threshold) {}
    double p_gate;
};

// Exported grid too coarse or non-uniform for finite-difference verification.
class ResolutionError : public Error {
public:
    using Error::Error;
};

// Left/right arcs disagree at the matching point beyond tolerance.
class AssemblyError : public Error {
public:
    using Error::Error;
};

// File or parse problems in the CLI layer.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace nodal
