#pragma once

#include <stdexcept>
#include <string>

namespace ghostsim {

/// A parameter or precondition was violated. The message names the field.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// The grid is too coarse for the requested statistics (e.g. l_c < 2 pixels).
class SamplingError : public ValidationError {
 public:
  explicit SamplingError(const std::string& what) : ValidationError(what) {}
};

/// Too few realizations to form an estimate.
class InsufficientDataError : public std::runtime_error {
 public:
  explicit InsufficientDataError(const std::string& what) : std::runtime_error(what) {}
};

/// Configuration text could not be parsed. `line()` is 0 when not line specific.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, int line);
  int line() const noexcept { return line_; }

 private:
  int line_;
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// Emits a non-fatal diagnostic. The default handler writes to stderr.
void warn(const std::string& message);

using WarningHandler = void (*)(const std::string&);
WarningHandler set_warning_handler(WarningHandler handler);

}  // namespace ghostsim
