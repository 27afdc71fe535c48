#pragma once

#include <stdexcept>
#include <string>

namespace qac {

// Stable error taxonomy shared by the C++ core and the C API layer.
enum class ErrorCode {
  invalid_argument = 1,
  config = 2,
  io = 3,
  schema = 4,
  numeric = 5,
  internal = 6,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

inline Error invalid_argument_error(const std::string& m) { return {ErrorCode::invalid_argument, m}; }
inline Error config_error(const std::string& m) { return {ErrorCode::config, m}; }
inline Error io_error(const std::string& m) { return {ErrorCode::io, m}; }
inline Error schema_error(const std::string& m) { return {ErrorCode::schema, m}; }
inline Error numeric_error(const std::string& m) { return {ErrorCode::numeric, m}; }
inline Error internal_error(const std::string& m) { return {ErrorCode::internal, m}; }

}  // namespace qac
