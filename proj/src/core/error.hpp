#pragma once

#include <stdexcept>
#include <string>

namespace rsos {

enum class ErrorCode {
  invalid_argument = 1,
  out_of_box,
  duplicate_time,
  inadmissible,
  resource_limit,
  unsupported,
  not_found,
  io,
  parse,
};

const char* to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above; the C
/// API maps them one-to-one onto rsos_status values.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace rsos
