#pragma once

#include <stdexcept>
#include <string>

namespace esgvine {

/// Invalid run configuration or command-line arguments.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input data that violates a schema or a domain rule.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Optimizer non-convergence, degenerate series, infeasible fits.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Copula parameters outside the family's admissible domain.
class ParameterError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Archive could not be read back: schema, version, digest or domain rule.
class ArchiveError : public DataError {
public:
    using DataError::DataError;
};

}  // namespace esgvine
