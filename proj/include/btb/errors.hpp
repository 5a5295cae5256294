#pragma once

#include <stdexcept>
#include <string>

namespace btb {

/// Invalid input: bad grid, non-admissible model parameters, malformed config.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Failure of a numerical procedure (linear solver, fixed-point iteration).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SolverError : public NumericalError {
public:
    SolverError(const std::string& what, double residual)
        : NumericalError(what + " (relative residual " + std::to_string(residual) + ")"),
          residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

class PicardDivergence : public NumericalError {
public:
    PicardDivergence(int iterations, double last_change)
        : NumericalError("Picard iteration did not converge after " + std::to_string(iterations) +
                         " iterations (last relative change " + std::to_string(last_change) + ")"),
          iterations_(iterations),
          last_change_(last_change) {}

    int iterations() const noexcept { return iterations_; }
    double last_change() const noexcept { return last_change_; }

private:
    int iterations_;
    double last_change_;
};

} // namespace btb
