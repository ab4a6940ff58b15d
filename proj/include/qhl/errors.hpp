// errors.hpp — error taxonomy shared by the library and the CLI exit codes.

#pragma once

#include <stdexcept>
#include <string>

namespace qhl {

// CLI process exit codes. Library code throws the exception types below;
// the CLI maps them onto these codes.
enum ExitCode : int {
    exit_ok = 0,
    exit_usage = 1,      // bad flags / bad subcommand / inconsistent options
    exit_data = 2,       // malformed or out-of-range input data and files
    exit_numerical = 3,  // numerical failure (infeasible construction, degeneracy, ...)
};

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Bad user-supplied configuration or flags.
class UsageError : public Error {
  public:
    using Error::Error;
};

// Malformed files, out-of-range values, shape mismatches in input data.
class DataError : public Error {
  public:
    using Error::Error;
};

// Numerical failure: non-Hermitian input where Hermitian is required,
// norm underflow in the sampler, bracketing failure in root finding, ...
class NumericalError : public Error {
  public:
    using Error::Error;
};

// No POVM satisfying the requested constraints exists (zero-sum or
// informational-completeness rank condition violated).
class ConstructionInfeasible : public NumericalError {
  public:
    using NumericalError::NumericalError;
};

// A POVM element is not rank-1 (Bloch vector shorter than unit length).
class NotRankOne : public NumericalError {
  public:
    using NumericalError::NumericalError;
};

}  // namespace qhl
