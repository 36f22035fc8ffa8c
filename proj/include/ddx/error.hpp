#pragma once

#include <stdexcept>
#include <string>

namespace ddx {

// Raised for malformed or invariant-violating inputs (documents, cases, ids).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Syntax or schema problem in a document; `location` is a line number,
// byte offset or JSON path depending on the reader.
class ParseError : public Error {
 public:
  ParseError(const std::string& location, const std::string& message)
      : Error(location + ": " + message), location_(location) {}

  const std::string& location() const { return location_; }

 private:
  std::string location_;
};

}  // namespace ddx
