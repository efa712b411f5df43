#pragma once

#include <stdexcept>
#include <string>

namespace roughmarkov {

// Bad input or an operation evaluated outside its domain. CLI exit code 2.
struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Iterative procedure failed to converge or to reach the requested accuracy.
// CLI exit code 3.
struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct AccuracyError : ConvergenceError {
    AccuracyError(const std::string& what, double best, double attained)
        : ConvergenceError(what), best_estimate(best), attained_tol(attained) {}
    double best_estimate;
    double attained_tol;
};

// Riccati solution blew up (outside the moment-existence region).
struct DivergenceError : ConvergenceError {
    using ConvergenceError::ConvergenceError;
};

// Rule geometry could not be built with the given parameters.
struct ConstructionError : DomainError {
    ConstructionError(const std::string& what, int index = -1)
        : DomainError(what), failing_index(index) {}
    int failing_index;
};

struct ExplosionError : ConvergenceError {
    ExplosionError(const std::string& what, double t0, double eta)
        : ConvergenceError(what), explosion_time(t0), eta_at_explosion(eta) {}
    double explosion_time;
    double eta_at_explosion;  // finite limit of the solution at T0
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace roughmarkov
