#pragma once

#include <stdexcept>
#include <string>

namespace stratrand {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Configuration that cannot be acted on (bad allocation, wrong scheme
// parameters, mismatched factor counts, unparseable config files, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

// A stratum key does not match the configured stratification (wrong number
// of factors, code outside the declared level range).
class ConfigMismatch : public ConfigError {
public:
    using ConfigError::ConfigError;
};

// Data-level problems (bad CSV rows, records missing required fields, ...).
class DataError : public Error {
public:
    using Error::Error;
};

// A subject record lacks arm, outcome, or has a covariate length mismatch.
class IncompleteRecord : public DataError {
public:
    using DataError::DataError;
};

// Estimation preconditions violated at runtime.
class EstimationError : public DataError {
public:
    using DataError::DataError;
};

// A (arm, stratum) cell required by an estimator has no subjects.
class EmptyCell : public EstimationError {
public:
    using EstimationError::EstimationError;
};

// A cell exists but is below the hard size floor for the requested quantity.
class InsufficientCell : public EstimationError {
public:
    using EstimationError::EstimationError;
};

// Within-cell covariate Gram matrix is numerically singular
// (reciprocal condition number below 1e-12).
class SingularGram : public EstimationError {
public:
    using EstimationError::EstimationError;
};

} // namespace stratrand
