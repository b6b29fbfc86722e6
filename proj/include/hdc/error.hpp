#ifndef HDC_ERROR_HPP_
#define HDC_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace hdc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

/// Raised when a row is too short to normalize (norm <= 1e-12).
class DegenerateRowError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace hdc

#endif  // HDC_ERROR_HPP_
