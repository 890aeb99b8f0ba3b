#pragma once

#include <stdexcept>
#include <string>

namespace platesift {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Image or raster has the wrong size for the requested operation.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A numeric parameter is outside its documented domain.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Geometric input is degenerate (coincident or collinear points, w = 0, ...).
class DegenerateError : public Error {
public:
    using Error::Error;
};

/// Not enough data to estimate the requested model.
class InsufficientDataError : public Error {
public:
    using Error::Error;
};

/// An item with the same key already exists.
class ConflictError : public Error {
public:
    using Error::Error;
};

/// Feature extraction produced fewer keypoints than required.
class InsufficientFeaturesError : public Error {
public:
    using Error::Error;
};

/// Incompatible or invalid configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// File could not be opened, read or written.
class IoError : public Error {
public:
    using Error::Error;
};

/// File contents are malformed (bad magic, truncated, bad field).
class FormatError : public Error {
public:
    using Error::Error;
};

/// File format version is not supported.
class VersionError : public Error {
public:
    using Error::Error;
};

}  // namespace platesift
