#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lognnet {

// Stable codes; the CLI maps them to exit statuses and prints the name.
enum class ErrorCode {
  kUsage = 2,
  kInvalidParameter = 3,
  kSchema = 4,
  kParse = 5,
  kLabel = 6,
  kImputation = 7,
  kShape = 8,
  kBalancing = 9,
  kFold = 10,
  kIo = 11,
  kFormat = 12,
};

std::string_view error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace lognnet
