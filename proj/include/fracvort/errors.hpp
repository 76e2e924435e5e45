#pragma once

#include <stdexcept>
#include <string>

namespace fracvort {

/// Argument outside the mathematical domain of an operation (negative time,
/// a = 0 in f_H, i == j in the cross moment, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Invalid model or experiment configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Request exceeds a configured size limit.
class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Malformed binary or text artifact.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fracvort
