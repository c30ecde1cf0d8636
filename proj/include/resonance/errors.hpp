#pragma once

#include <stdexcept>
#include <string>

namespace resonance {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent user configuration (grid too small, unknown family, ...).
class ConfigurationError : public Error {
public:
    using Error::Error;
};

/// Diffusion coefficient not strictly positive somewhere on the grid.
class EllipticityError : public Error {
public:
    using Error::Error;
};

/// Requested resonance value is not an eigenvalue of the discrete operator.
class ResonanceMismatchError : public Error {
public:
    using Error::Error;
};

/// Grid functions or matrices of incompatible sizes.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Backward evolution requested for data with a component in X+.
class GroupExtensionError : public Error {
public:
    using Error::Error;
};

/// Time integration produced a non-finite state.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, double time) : Error(what), time_(time) {}
    double time() const noexcept { return time_; }

private:
    double time_;
};

/// Pointwise nonlinearity returned a non-finite value.
class NonlinearityDomainError : public Error {
public:
    using Error::Error;
};

/// Degree requested for a map that vanishes (numerically) on the boundary.
class DegreeUndefinedError : public Error {
public:
    using Error::Error;
};

/// Boundary sampling too coarse to unwrap the winding angle.
class ResolutionError : public Error {
public:
    using Error::Error;
};

}  // namespace resonance
