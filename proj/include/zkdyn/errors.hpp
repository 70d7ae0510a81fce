#pragma once

#include <stdexcept>
#include <string>

namespace zkdyn {

// Validation failures (bad model / bad input). CLI maps these to exit code 2.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CommutationViolation : ValidationError {
    using ValidationError::ValidationError;
};
struct NotInvertible : ValidationError {
    using ValidationError::ValidationError;
};
struct WordTooLong : ValidationError {
    using ValidationError::ValidationError;
};
struct NotCommutingExact : ValidationError {
    using ValidationError::ValidationError;
};
struct NotUnimodular : ValidationError {
    using ValidationError::ValidationError;
};
struct DimensionMismatch : ValidationError {
    using ValidationError::ValidationError;
};
struct GammaOutOfRange : ValidationError {
    using ValidationError::ValidationError;
};
struct EpsilonTooLarge : ValidationError {
    using ValidationError::ValidationError;
};

// Numerical failures mid-run. CLI maps these to exit code 3.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericalBlowup : NumericalError {
    using NumericalError::NumericalError;
};
struct DegenerateFrame : NumericalError {
    using NumericalError::NumericalError;
};
struct NotSimultaneouslyDiagonalizable : NumericalError {
    using NumericalError::NumericalError;
};

// Refusal to treat a floating-point direction as rational. CLI exit code 4.
struct NotRational : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace zkdyn
