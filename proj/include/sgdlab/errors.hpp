#pragma once

#include <stdexcept>
#include <string>

namespace sgdlab {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or out-of-contract arguments (non-finite entries, bad edges, ...).
class InputError : public Error {
public:
    using Error::Error;
};

class DimensionError : public InputError {
public:
    using InputError::InputError;
};

class NotPsdError : public Error {
public:
    using Error::Error;
};

class FitError : public Error {
public:
    using Error::Error;
};

/// Non-finite state or loss above the divergence threshold.
class DivergedError : public Error {
public:
    using Error::Error;
};

/// Loss fell to (or below) zero where log L is required.
class PositivityError : public Error {
public:
    using Error::Error;
};

/// The model does not provide the requested capability (e.g. output gradients).
class UnsupportedError : public Error {
public:
    using Error::Error;
};

class EscapeNotObservedError : public Error {
public:
    using Error::Error;
};

}  // namespace sgdlab
