#pragma once

#include <stdexcept>
#include <string>

namespace jdcompact {

/// Invalid model, contract, grid or configuration input.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Base for failures of the numerical scheme itself.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The correcting-to-convergence loop ran out of iterations.
class NonConvergenceError : public NumericalError {
public:
    NonConvergenceError(int level, int iterations, double residual)
        : NumericalError("inner iteration did not converge at level " + std::to_string(level) +
                         " after " + std::to_string(iterations) +
                         " iterations (residual " + std::to_string(residual) + ")"),
          level_(level), iterations_(iterations), residual_(residual) {}

    int level() const { return level_; }
    int iterations() const { return iterations_; }
    double residual() const { return residual_; }

private:
    int level_;
    int iterations_;
    double residual_;
};

/// A non-finite value appeared in the solution.
class DivergenceError : public NumericalError {
public:
    DivergenceError(int level, int node)
        : NumericalError("non-finite value at level " + std::to_string(level) + ", node " +
                         std::to_string(node)),
          level_(level), node_(node) {}

    int level() const { return level_; }
    int node() const { return node_; }

private:
    int level_;
    int node_;
};

}  // namespace jdcompact
