#pragma once

#include <stdexcept>
#include <string>

namespace qaccel {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class GraphErrorCode {
  malformed,
  empty,
  length_mismatch,
  self_loop,
  duplicate_edge,
  non_finite_weight,
  node_out_of_range,
};

class GraphError : public Error {
public:
  GraphError(GraphErrorCode code, const std::string& what)
      : Error(what), code_(code) {}
  GraphErrorCode code() const noexcept { return code_; }

private:
  GraphErrorCode code_;
};

/// Raised by data source identification when no catalog family explains the
/// observed weights.
class UnrecognizedSourceError : public Error {
public:
  using Error::Error;
};

class EngineError : public Error {
public:
  using Error::Error;
};

class OptimizerError : public Error {
public:
  using Error::Error;
};

class MetricError : public Error {
public:
  using Error::Error;
};

/// Not enough finite-distance neighbors for a k-NN query.
class CoverageError : public Error {
public:
  using Error::Error;
};

class GeneratorError : public Error {
public:
  using Error::Error;
};

class DatabankError : public Error {
public:
  using Error::Error;
};

/// A record's stored score does not reproduce under re-evaluation.
class IntegrityError : public DatabankError {
public:
  IntegrityError(const std::string& key, const std::string& what)
      : DatabankError(what), key_(key) {}
  const std::string& key() const noexcept { return key_; }

private:
  std::string key_;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

}  // namespace qaccel
