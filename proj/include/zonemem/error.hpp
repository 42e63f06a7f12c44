#pragma once

#include <stdexcept>
#include <string>

namespace zonemem {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input violates a documented precondition or invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A file is missing, unreadable, or does not match its schema.
class FormatError : public Error {
public:
    using Error::Error;
};

/// A caller asked the store for something inconsistent with current
/// residency. Always indicates a bug in the calling policy.
class ContractError : public Error {
public:
    using Error::Error;
};

}  // namespace zonemem
