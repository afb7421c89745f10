#pragma once

#include <stdexcept>
#include <string>

namespace idslab {

/// Invalid input: violated precondition, mismatched shapes, bad ranges.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A configured ceiling (window extent, dense dimension) was exceeded.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or schema-violating configuration.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Persisted payload does not match its recorded digest or is missing.
class IntegrityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Something that must be impossible for valid inputs happened.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace idslab
