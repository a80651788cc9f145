#pragma once

#include <stdexcept>
#include <string>

namespace martrep {

// Error taxonomy shared by the core library and the C API status codes.
enum class ErrorCode {
  Domain = 1,       // argument outside the mathematical domain of the operation
  Usage = 2,        // structurally invalid call (bad config, malformed input)
  Unsupported = 3,  // valid object, but outside what this operation implements
  Resource = 4,     // configured cap exceeded (term count, order limit)
  Numeric = 5,      // non-finite intermediate where finiteness is required
  Parse = 6,        // unreadable serialized form
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) raise(code, message);
}

}  // namespace martrep
