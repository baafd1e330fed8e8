#pragma once

#include <stdexcept>
#include <string>

namespace lincons {

/// Base class for every error thrown by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller-supplied data is invalid: non-finite entries, dimension mismatches,
/// malformed files or configs.
class InputError : public Error {
public:
    using Error::Error;
};

/// A numeric kernel failed: eigen solver did not converge, exponential overflowed.
class ComputationError : public Error {
public:
    using Error::Error;
};

/// A structural precondition on the system does not hold (wrong rank pattern,
/// no direct-sum decomposition, missing zero eigenvalue, ...).
class StructuralError : public Error {
public:
    using Error::Error;
};

/// Intermediate results contradict an upstream classification; usually signals
/// a borderline input that slipped past the tolerance bands.
class InconsistencyError : public Error {
public:
    using Error::Error;
};

/// A randomized generator exhausted its resampling budget.
class GenerationError : public Error {
public:
    using Error::Error;
};

/// A transform is too ill-conditioned to be used safely.
class ConditioningError : public Error {
public:
    using Error::Error;
};

}  // namespace lincons
