#pragma once

#include <stdexcept>
#include <string>

namespace nodal {

// Bad input: unknown model, unsupported dimension, malformed config.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical routine could not produce a trustworthy value.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmbeddingNotPSD : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DegenerateJoint : public NumericalError {
 public:
  DegenerateJoint(const std::string& what, double r_threshold)
      : NumericalError(what), r_threshold_(r_threshold) {}
  double r_threshold() const noexcept { return r_threshold_; }

 private:
  double r_threshold_;
};

class NonPositiveGamma2 : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace nodal
