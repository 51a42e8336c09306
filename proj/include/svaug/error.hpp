#pragma once

#include <stdexcept>
#include <string>

namespace svaug {

// Exit-code categories used by the CLI: 2 bad input, 3 empty data,
// 4 broken internal invariant.
enum class ErrorCode : int {
  InputError = 2,
  EmptyData = 3,
  Internal = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& msg)
      : std::runtime_error(msg), code_(code) {}

  ErrorCode code() const { return code_; }
  int exit_code() const { return static_cast<int>(code_); }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void throw_input(const std::string& msg) {
  throw Error(ErrorCode::InputError, msg);
}

[[noreturn]] inline void throw_empty(const std::string& msg) {
  throw Error(ErrorCode::EmptyData, msg);
}

[[noreturn]] inline void throw_internal(const std::string& msg) {
  throw Error(ErrorCode::Internal, msg);
}

}  // namespace svaug
