#pragma once

#include <stdexcept>
#include <string>

namespace ibs {

// Mismatched vector/matrix dimensions at a module boundary.
struct shape_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Invalid or inconsistent configuration values.
struct config_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Data violating a precondition (single-class labels, non-finite entries).
struct data_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Operation not available for this model or dimensionality.
struct unsupported_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Filesystem failures.
struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input file; carries a 1-based line number when known.
struct parse_error : std::runtime_error {
  parse_error(const std::string& msg, int line = 0)
      : std::runtime_error(line > 0 ? msg + " (line " + std::to_string(line) + ")"
                                    : msg),
        line_number(line) {}
  int line_number;
};

}  // namespace ibs
