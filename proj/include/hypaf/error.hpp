#pragma once

#include <stdexcept>
#include <string>

namespace hypaf {

/// Argument outside the mathematical domain of an operation (k out of range,
/// non-positive radius, mismatched dimension, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A documented precondition does not hold for otherwise well-formed input,
/// e.g. a curvature vector outside the Garding cone an inequality needs.
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Floating point breakdown: division blow-up, non-finite values, a root
/// finder that did not converge.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file or configuration.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace hypaf
