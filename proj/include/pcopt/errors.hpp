#pragma once

#include <stdexcept>
#include <string>

namespace pcopt {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A parameter violates a documented domain invariant.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Zero market price of risk: the state-price density has an atom.
class DegenerateMarket : public Error {
public:
    using Error::Error;
};

/// Initial wealth cannot finance the constraint.
class InfeasibleBudget : public Error {
public:
    using Error::Error;
};

/// A root search or quadrature did not reach its tolerance.
class NumericalFailure : public Error {
public:
    using Error::Error;
};

}  // namespace pcopt
