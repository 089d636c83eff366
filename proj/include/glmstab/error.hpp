#ifndef GLMSTAB_ERROR_HPP
#define GLMSTAB_ERROR_HPP

#include <stdexcept>
#include <string>

namespace glmstab {

enum class ErrorCode : int {
  Argument = 1,
  Data,
  OutOfRange,
  MissingConstants,
  NotPositiveDefinite,
  UnsupportedDomainTransform,
  InfeasiblePrediction,
  Spec,
  Config,
  Io,
};

const char* to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries one of the codes above; the C
// API maps them one-to-one onto gs_status values.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

}  // namespace glmstab

#endif  // GLMSTAB_ERROR_HPP
