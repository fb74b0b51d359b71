#pragma once

#include <stdexcept>
#include <string>

namespace dispeq {

/// Frequency lies in a band where the material model is not valid
/// (negative permittivity or imaginary refractive index).
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Mode is below cutoff at the requested frequency.
struct CutoffError : std::runtime_error {
    double cutoff_frequency; // same units as the offending frequency; NaN if unknown
    CutoffError(const std::string& msg, double cutoff)
        : std::runtime_error(msg), cutoff_frequency(cutoff) {}
};

struct NoRootError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Design frequency fell outside the admissible band.
struct OrderingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct QuadratureError : std::runtime_error {
    double error_estimate;
    QuadratureError(const std::string& msg, double err)
        : std::runtime_error(msg), error_estimate(err) {}
};

struct DetNotUnimodularError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The assembled nonlinear system is rank-deficient at every converged point.
struct DegenerateSystemError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InfeasibleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Matrix-logarithm eigenvalue path crossed the branch cut inside the window.
struct BranchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Pulse energy reached the edge of the time window.
struct AliasError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    std::string field; // dotted path of the offending key, empty for file-level errors
    ConfigError(const std::string& msg, std::string field_path = {})
        : std::runtime_error(msg), field(std::move(field_path)) {}
};

} // namespace dispeq
