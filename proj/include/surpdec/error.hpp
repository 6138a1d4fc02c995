#pragma once

#include <stdexcept>
#include <string>

namespace surpdec {

// Mirrors surpdec_status in surpdec.h; keep the numeric values in sync.
enum class ErrorCode : int {
  InvalidArgument = 1,
  SchemaError = 2,
  IoError = 3,
  MissingVeridical = 4,
  EmptySet = 5,
  ZeroNormEmbedding = 6,
  BackendUnavailable = 7,
  MissingEntry = 8,
  NumericalUnderflow = 9,
  NegativeDeep = 10,
  TargetUnreachable = 11,
  IterationLimit = 12,
  UnknownItemId = 13,
  UnpairedItem = 14,
  ContextMismatch = 15,
  DanglingControlRef = 16,
  RankDeficient = 17,
  JoinError = 18,
  ItemFailures = 19,
  Internal = 99,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace surpdec
