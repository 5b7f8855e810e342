#pragma once

#include <stdexcept>
#include <string>

namespace lglmf {

// Error taxonomy shared by the C++ core and the C API status codes.
enum class ErrorCode {
  invalid_argument = 1,
  io = 2,
  format = 3,
  degenerate_dataset = 4,
  split = 5,
  cold_user = 6,
  divergence = 7,
  fusion = 8,
  coverage = 9,
  internal = 10,
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::io: return "io";
    case ErrorCode::format: return "format";
    case ErrorCode::degenerate_dataset: return "degenerate-dataset";
    case ErrorCode::split: return "split";
    case ErrorCode::cold_user: return "cold-user";
    case ErrorCode::divergence: return "divergence";
    case ErrorCode::fusion: return "fusion";
    case ErrorCode::coverage: return "coverage";
    case ErrorCode::internal: return "internal";
  }
  return "unknown";
}

}  // namespace lglmf
