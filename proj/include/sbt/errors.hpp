#ifndef SBT_ERRORS_HPP
#define SBT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace sbt {

// Bad physical input (negative temperature, non-finite power, ...).
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// A structurally invalid object (overlapping pulses, empty chain, ...).
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Configuration file problems, with a line number when known.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg, int line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg),
          line_number(line) {}
    int line_number;
};

// Statistically unusable input (e.g. anti-Stokes rate exceeding Stokes).
struct EstimationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Nonlinear fit failed to converge or the data admit no line.
struct FitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Quadrature or linear-algebra breakdown.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace sbt

#endif
