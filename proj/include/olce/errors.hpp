// Copyright 2026 The olce authors
//
// Licensed under the Apache License, Version 2.0

#pragma once

#include <stdexcept>
#include <string>

namespace olce {

/// Base type for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shape/size mismatch (names expected vs found).
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Malformed file contents (CSV cell, JSON field, ...).
class ParseError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration or usage (bad preset, empty split, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Data that is structurally fine but unusable (single-class training
/// set, rank deficiency, non-finite values, ...).
class DataError : public Error {
public:
    using Error::Error;
};

/// Numeric failure at runtime (diverged loss, failed gradient check).
class NumericError : public Error {
public:
    using Error::Error;
};

/// Filesystem failure, always carries the offending path.
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace olce
