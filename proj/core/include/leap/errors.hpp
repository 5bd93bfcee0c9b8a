#pragma once

#include <stdexcept>
#include <string>

namespace leap {

// Error taxonomy. Everything derives from leap::Error so callers can catch
// the whole family; the CLI maps ConfigError/ParseError to exit code 1 and
// NumericError to exit code 2.

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

class GraphError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class LabelError : public Error {
 public:
  using Error::Error;
};

class SamplingError : public Error {
 public:
  using Error::Error;
};

class FrozenModelError : public Error {
 public:
  using Error::Error;
};

}  // namespace leap
