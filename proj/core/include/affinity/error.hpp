#pragma once

#include <stdexcept>
#include <string>

namespace affinity {

enum class ErrorCode {
  kInvalidArgument,
  kCoincidentSites,
  kDomain,
  kBoxExcludesPoint,
  kOutsideCell,
  kUnboundedChord,
  kEmptyCell,
  kDimensionMismatch,
  kParse,
  kIo,
};

const char* to_string(ErrorCode code);

// All library failures surface as this exception type; `code()` lets callers
// branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace affinity
