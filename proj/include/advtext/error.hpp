#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace advtext {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad index, bad replacement string, bad chunk or config parameters.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Malformed input text (embedding file, JSONL, config file).
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Missing files, corrupted or mismatched model streams.
class DataError : public Error {
 public:
  using Error::Error;
};

class InvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace advtext
