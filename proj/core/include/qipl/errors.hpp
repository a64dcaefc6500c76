#pragma once

#include <stdexcept>
#include <string>

namespace qipl {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One subclass per failure family so callers (notably the CLI) can map
// them onto distinct exit codes.
class DimensionError : public Error { using Error::Error; };
class ArgumentError : public Error { using Error::Error; };
class ValidationError : public Error { using Error::Error; };
class CompatibilityError : public Error { using Error::Error; };
class ScopeError : public Error { using Error::Error; };
class SizeError : public Error { using Error::Error; };
class ParameterError : public Error { using Error::Error; };
class RangeError : public Error { using Error::Error; };
class PreconditionError : public Error { using Error::Error; };
class ParseError : public Error { using Error::Error; };

}  // namespace qipl
