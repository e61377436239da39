#pragma once

#include <stdexcept>
#include <string>

namespace thiele {

// Base class for all engine errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Config document malformed or missing a required key.
struct ParseError : Error {
    explicit ParseError(const std::string& what) : Error(what) {}
};

// Model contents violate a structural invariant (negative rate, T <= 0, ...).
struct ValidationError : Error {
    explicit ValidationError(const std::string& what) : Error(what) {}
};

// Backward solver produced a non-finite value or was misconfigured.
struct SolverError : Error {
    explicit SolverError(const std::string& what) : Error(what) {}
};

// Thinning proposal found a total rate above the declared bound.
struct SimulationError : Error {
    explicit SimulationError(const std::string& what) : Error(what) {}
};

// Inner fixed-point iteration failed to reach tolerance.
struct ConvergenceError : Error {
    explicit ConvergenceError(const std::string& what) : Error(what) {}
};

// Actuarial equivalence cannot be maintained (x/0 with x != 0).
struct EquivalenceError : Error {
    explicit EquivalenceError(const std::string& what) : Error(what) {}
};

// API misuse: wrong model kind, mismatched horizon, missing inputs.
struct UsageError : Error {
    explicit UsageError(const std::string& what) : Error(what) {}
};

// File could not be read or written.
struct IoError : Error {
    explicit IoError(const std::string& what) : Error(what) {}
};

} // namespace thiele
