#pragma once

#include <stdexcept>
#include <string>

namespace illbes {

// Raised by the text parsers; `position` is a 0-based byte offset into the input.
struct ParseError : std::runtime_error {
  std::size_t position;
  ParseError(std::string msg, std::size_t pos)
      : std::runtime_error(std::move(msg)), position(pos) {}
};

// Raised when a derivation fails to check against its rules.
struct CheckError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised on malformed files, unknown JSON fields, out-of-namespace atoms.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace illbes
