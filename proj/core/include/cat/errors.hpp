#pragma once

#include <stdexcept>
#include <string>

namespace cat {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shape or configuration mismatch between latents, seed sets or specs.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Layer or dimension index outside the valid range.
class IndexError : public Error {
public:
    using Error::Error;
};

/// A request for zero items where at least one is required.
class EmptyRequestError : public Error {
public:
    using Error::Error;
};

/// Too few seeds for a discovery operation.
class InsufficientSeedsError : public Error {
public:
    using Error::Error;
};

/// Overlapping signature cells in a multi-attribute application.
class ConflictError : public Error {
public:
    using Error::Error;
};

/// Malformed input file; message names the offending line where known.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Filesystem failure (open, write, rename).
class IoError : public Error {
public:
    using Error::Error;
};

/// A metric has no defined value for the given inputs (rendered as a dash).
class UndefinedMetricError : public Error {
public:
    using Error::Error;
};

/// A strict majority was required but the counts tie.
class TieError : public Error {
public:
    using Error::Error;
};

/// A referenced signature is not present in the registry.
class UnknownSignatureError : public Error {
public:
    using Error::Error;
};

} // namespace cat
