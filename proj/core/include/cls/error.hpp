#pragma once

#include <stdexcept>
#include <string>

namespace cls {

enum class ErrorKind {
  InvalidArgument,
  Parse,
  Io,
  Numeric,
  UnsupportedTask,
};

/// Single exception type thrown by the library. The kind drives CLI exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

inline void require(bool condition, const std::string& message,
                    ErrorKind kind = ErrorKind::InvalidArgument) {
  if (!condition) throw Error(kind, message);
}

}  // namespace cls
