#pragma once

#include <stdexcept>
#include <string>

namespace edgecasc {

/// Input that violates a documented precondition (bad profile, bad probability, ...).
class ValidationError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed trace or config file. Carries the 1-based line number when known.
class ParseError : public std::runtime_error {
  public:
    ParseError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
          line_(line) {}

    std::size_t line() const { return line_; }

  private:
    std::size_t line_;
};

/// Offline calibration produced an unusable result (e.g. crossing switch limits).
class CalibrationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Internal consistency violation inside a running simulation. Always an actor bug.
class SimulationError : public std::logic_error {
  public:
    using std::logic_error::logic_error;
};

}  // namespace edgecasc
