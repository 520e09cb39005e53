#include "core/error.hpp"

namespace rsos {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid argument";
    case ErrorCode::out_of_box: return "out of box";
    case ErrorCode::duplicate_time: return "duplicate time";
    case ErrorCode::inadmissible: return "inadmissible initial condition";
    case ErrorCode::resource_limit: return "resource limit";
    case ErrorCode::unsupported: return "unsupported";
    case ErrorCode::not_found: return "not found";
    case ErrorCode::io: return "io error";
    case ErrorCode::parse: return "parse error";
  }
  return "unknown error";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(message), code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace rsos
