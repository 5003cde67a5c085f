// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace jtload {

// Shapes or indices that do not line up (scenario vs pattern vs load vector).
class StructuralError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Numeric input outside the domain of a formula (non-positive SINR, NaN, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// An operation was called in a state its contract excludes.
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Malformed scenario/pattern/instance documents. The message names the field.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string field, const std::string& what)
      : std::runtime_error("field '" + field + "': " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// A configuration or generator parameter out of range. The message names it.
class InvalidParameterError : public std::invalid_argument {
 public:
  InvalidParameterError(std::string name, const std::string& what)
      : std::invalid_argument(name + ": " + what), name_(std::move(name)) {}

  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

// Raised when the optimizer observes a state its own guarantees rule out.
class InternalConsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace jtload
