#pragma once

#include <stdexcept>
#include <string>

namespace cogsec {

// Error categories surfaced through the C API as status codes.
enum class ErrorCode {
  Structural = 1,   // dimension / shape mismatch
  Validation,       // value outside its domain
  Config,           // configuration document missing or inconsistent
  Conflict,         // identity already known
  NotFound,
  Persistence,      // journal / snapshot I/O
  Training,         // divergence during backprop
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace cogsec
