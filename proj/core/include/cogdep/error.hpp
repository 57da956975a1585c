#pragma once

#include <stdexcept>
#include <string>

namespace cogdep {

// Base of every error the library raises. The CLI maps the subclasses onto
// process exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input cannot be read at all (missing file, unreadable stream, bad flag).
class InputError : public Error {
public:
    using Error::Error;
};

// Input was readable but its contents are unusable.
class DataQualityError : public Error {
public:
    using Error::Error;
};

// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
public:
    using Error::Error;
};

// Integration or estimation produced a non-finite value.
class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace cogdep
