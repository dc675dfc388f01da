#pragma once

#include <stdexcept>
#include <string>

namespace rubriceval {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Rubric or dataset failed structural validation.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A judge response (or other structured text) could not be decoded.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Caller supplied an unusable configuration (bad strategy combination,
// missing scripted response, mismatched resume config, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Network / IO failure talking to a judge backend. Retryable.
class TransportError : public Error {
 public:
  using Error::Error;
};

// Score is mathematically undefined (e.g. every positive-weight criterion
// was skipped, leaving an empty denominator).
class UndefinedScoreError : public Error {
 public:
  using Error::Error;
};

// A verdict is incompatible with the criterion scale it was applied to.
class InvalidVerdictError : public Error {
 public:
  using Error::Error;
};

// File could not be loaded or decoded (datasets, manifests, caches).
class LoadError : public Error {
 public:
  using Error::Error;
};

}  // namespace rubriceval
