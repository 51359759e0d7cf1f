#include "ghostsim/error.hpp"

#include <atomic>
#include <iostream>

namespace ghostsim {

namespace {

void default_handler(const std::string& message) {
  std::cerr << "ghostsim warning: " << message << '\n';
}

std::atomic<WarningHandler> g_handler{&default_handler};

std::string with_line(const std::string& what, int line) {
  if (line <= 0) return what;
  return "line " + std::to_string(line) + ": " + what;
}

}  // namespace

ConfigError::ConfigError(const std::string& what, int line)
    : std::runtime_error(with_line(what, line)), line_(line) {}

void warn(const std::string& message) {
  if (auto handler = g_handler.load()) handler(message);
}

WarningHandler set_warning_handler(WarningHandler handler) {
  return g_handler.exchange(handler);
}

}  // namespace ghostsim
