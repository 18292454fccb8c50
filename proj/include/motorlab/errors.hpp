#pragma once

#include <stdexcept>
#include <string>

namespace motorlab {

/// Bad arguments, malformed configs, violated preconditions. CLI exit code 2.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numerical failure: singular systems, nonpositive null vectors, divergence. CLI exit code 1.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NonConvergenceError : public SolverError {
public:
    NonConvergenceError(const std::string& what, double last_residual)
        : SolverError(what), last_residual_(last_residual) {}
    double last_residual() const noexcept { return last_residual_; }

private:
    double last_residual_;
};

/// Configuration asks for something a solver does not support (e.g. strong regime with I != 2).
class UnsupportedConfigError : public InputError {
public:
    using InputError::InputError;
};

/// File system failures. CLI exit code 3.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace motorlab
