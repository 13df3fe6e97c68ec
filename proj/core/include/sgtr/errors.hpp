#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sgtr {

/// Base class for all toolkit errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid configuration or failed input validation.
struct ConfigError : Error {
    using Error::Error;
};

/// Transfer-function evaluation point coincides with a plant eigenvalue.
struct EigenvalueCollision : Error {
    using Error::Error;
};

/// Sylvester solve attempted with overlapping spectra.
struct ResonantSylvester : Error {
    using Error::Error;
};

/// Problem size exceeds the dense-solver capacity guard.
struct CapacityError : Error {
    using Error::Error;
};

/// Frequency data fails the full-rank (non-resonance) condition.
struct NonResonanceViolated : Error {
    NonResonanceViolated(const std::string& what, std::vector<double> sv)
        : Error(what), singular_values(std::move(sv)) {}
    std::vector<double> singular_values;
};

/// Simulation produced non-finite values.
struct DivergenceError : Error {
    DivergenceError(const std::string& what, double t) : Error(what), time(t) {}
    double time;
};

/// A stage of a sequential design destabilized the loop.
struct StageDestabilized : Error {
    StageDestabilized(const std::string& what, int s) : Error(what), stage(s) {}
    int stage;
};

/// Operation requires a stable (Hurwitz) plant.
struct NotStableError : Error {
    using Error::Error;
};

/// The closed loop is unstable at the requested tuning gain.
struct UnstableAtEps : Error {
    UnstableAtEps(const std::string& what, double e) : Error(what), eps(e) {}
    double eps;
};

/// A numerical solver failed or returned out-of-tolerance results.
struct SolverError : Error {
    using Error::Error;
};

} // namespace sgtr
