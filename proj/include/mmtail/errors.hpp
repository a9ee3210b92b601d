#pragma once

#include <stdexcept>
#include <string>

namespace mmtail {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Evaluation requested outside the declared domain of an exponent, MGF or matrix function.
class DomainError : public Error {
public:
    using Error::Error;
};

/// The model specification violates a structural invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// The domain interval is {0}; no tail analysis is possible.
class DomainDegenerate : public Error {
public:
    using Error::Error;
};

/// Input parameters outside the supported case (e.g. both killing rates zero).
class DegenerateInput : public Error {
public:
    using Error::Error;
};

/// Numerical failures. The CLI maps these to exit code 3.
class NumericalError : public Error {
public:
    using Error::Error;
};

class ConvergenceError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class SingularMatrix : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// y'A'(s0)x vanishes, so the pole is not simple.
class NotSimple : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class BracketFailure : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// The generator is not irreducible.
class Reducible : public Error {
public:
    using Error::Error;
};

/// Lattice structure could not be determined, so the bound width B is unknown.
class BUnknown : public Error {
public:
    using Error::Error;
};

/// Too few sample points inside the requested tail window.
class InsufficientTail : public Error {
public:
    using Error::Error;
};

}  // namespace mmtail
