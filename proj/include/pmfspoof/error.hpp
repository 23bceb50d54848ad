#pragma once

#include <stdexcept>
#include <string>

namespace pmfspoof {

/// Bad configuration, bad arguments, or a missing upstream stage artifact.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or unsupported input data (audio, manifests, model files).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical procedure could not produce a valid result.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pmfspoof
