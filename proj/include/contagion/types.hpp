#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace contagion {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Componentwise negative part, x^- = max(-x, 0). Always nonnegative.
inline Vector negative_part(const Vector& v) { return (-v).cwiseMax(0.0); }

/// Componentwise positive part, x^+ = max(x, 0).
inline Vector positive_part(const Vector& v) { return v.cwiseMax(0.0); }

inline double sup_norm(const Vector& v) {
    return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

/// Shared iteration controls for all fixed-point loops.
struct SolveOptions {
    double tolerance = 1e-10;
    int max_iterations = 10000;
};

/// Malformed user input (negative entries, index out of range, ...).
class InvalidInputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Structural defect in a contract specification (cycles, unbounded chains).
class ContractStructureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A solver exhausted its iteration budget or produced a non-finite value.
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, double best_residual, int iterations)
        : std::runtime_error(what), best_residual(best_residual), iterations(iterations) {}

    double best_residual;
    int iterations;
};

}  // namespace contagion
