#pragma once

#include <stdexcept>
#include <string>

namespace qlrmr {

enum class ErrorKind {
  invalid_argument,
  dimension,
  numeric,
  config,
  io,
  parse,
};

// Single exception type for the library; the kind maps onto C API status codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) throw Error(kind, message);
}

}  // namespace qlrmr
