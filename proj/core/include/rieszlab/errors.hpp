#pragma once

#include <stdexcept>
#include <string>

namespace riesz {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Singular evaluation, e.g. g at the origin or coincident particles.
class DomainError : public Error {
public:
    using Error::Error;
};

// Parameters outside the admissible interval.
class RangeError : public Error {
public:
    using Error::Error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double residual, int iterations)
        : Error(what), residual_(residual), iterations_(iterations) {}
    double residual() const { return residual_; }
    int iterations() const { return iterations_; }

private:
    double residual_;
    int iterations_;
};

// Grid too coarse for the requested quantity, or boundary layer unresolved.
class ResolutionError : public Error {
public:
    using Error::Error;
};

class BoxTooSmall : public ResolutionError {
public:
    using ResolutionError::ResolutionError;
};

// A function that does not vanish at the grid edge needs a tail model.
class TailRequired : public Error {
public:
    using Error::Error;
};

class Unsupported : public Error {
public:
    using Error::Error;
};

class InternalError : public Error {
public:
    using Error::Error;
};

}  // namespace riesz
