#pragma once

#include <stdexcept>
#include <string>

namespace mickit {

/// Malformed or invalid input data (bad file, NaN, non-normalized mass).
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A numeric routine failed to produce a trustworthy result.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace mickit
