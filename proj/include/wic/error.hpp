#pragma once

#include <stdexcept>
#include <string>

namespace wic {

// Base class for every error raised by the library. Messages are meant to be
// shown to a user as-is.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class DataError : public Error {
 public:
  using Error::Error;
};

class AlignmentError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace wic
