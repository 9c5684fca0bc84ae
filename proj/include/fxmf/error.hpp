#pragma once

#include <stdexcept>
#include <string>

namespace fxmf {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller supplied an invalid argument or configuration (CLI exit code 2).
class UsageError : public Error {
public:
    using Error::Error;
};

/// Input data violates an invariant (bad price, unordered rows, unreadable file).
class DataError : public Error {
public:
    using Error::Error;
};

/// Input is well-formed but numerically degenerate (zero variance, zero sigma).
class DegenerateInputError : public Error {
public:
    using Error::Error;
};

/// Series that must share a time grid do not.
class AlignmentError : public Error {
public:
    using Error::Error;
};

/// Argument outside the mathematical domain of a function.
class DomainError : public Error {
public:
    using Error::Error;
};

}  // namespace fxmf
