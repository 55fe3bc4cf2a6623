// errors.hpp — exception hierarchy shared by all gffnet modules.
#pragma once

#include <stdexcept>
#include <string>

namespace gffnet {

// Base class so callers can catch everything from this library at once.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// A requested point does not lie on the sampled lattice.
struct OffLatticeError : Error {
    using Error::Error;
};

// Circulant embedding produced an eigenvalue more negative than the clip rule allows.
struct EmbeddingError : Error {
    using Error::Error;
};

// Geometry or parameter validation failed (box alignment, zeta rule, kernel range...).
struct ConfigError : Error {
    using Error::Error;
};

// Linear solve failed: disconnected terminals, singular system, or no convergence.
struct SolveError : Error {
    using Error::Error;
};

// Path stripping got stuck with leftover flow it cannot route (cyclic residual).
struct DecompositionError : Error {
    using Error::Error;
};

// A walk exceeded its step budget. Carries the number of steps taken so far.
struct BudgetError : Error {
    long long steps_taken;
    BudgetError(const std::string& what, long long steps)
        : Error(what), steps_taken(steps) {}
};

// File format / persistence problems.
struct IoError : Error {
    using Error::Error;
};

// A requested synthesis would exceed the memory budget. Carries the estimate.
struct ResourceError : Error {
    long long required_bytes;
    ResourceError(const std::string& what, long long bytes)
        : Error(what), required_bytes(bytes) {}
};

}  // namespace gffnet
