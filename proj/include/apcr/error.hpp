#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace apcr {

// Three families map onto CLI exit codes: usage (2), data (3), numeric (4).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

/// Non-positive or otherwise out-of-domain distribution/model parameter.
class ParameterError : public UsageError {
 public:
  using UsageError::UsageError;
};

/// A data object failed one or more invariants; every violation is kept.
class ValidationError : public DataError {
 public:
  ValidationError(const std::string& what, std::vector<std::string> violations)
      : DataError(what + join(violations)), violations_(std::move(violations)) {}

  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string out;
    for (const auto& s : v) out += (out.empty() ? ": " : "; ") + s;
    return out;
  }
  std::vector<std::string> violations_;
};

/// Malformed file: wrong header, missing column, unparsable field.
class SchemaError : public DataError {
 public:
  using DataError::DataError;
};

/// The profile likelihood has no finite maximizer (e.g. all times equal).
class DegenerateSampleError : public NumericError {
 public:
  using NumericError::NumericError;
};

class ConvergenceError : public NumericError {
 public:
  ConvergenceError(const std::string& what, std::vector<double> trace)
      : NumericError(what), trace_(std::move(trace)) {}
  const std::vector<double>& trace() const noexcept { return trace_; }

 private:
  std::vector<double> trace_;
};

/// Credible interval cannot be resolved from the weighted sample.
class ResolutionError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Importance weights collapsed (all zero / non-finite).
class WeightDegeneracyError : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace apcr
