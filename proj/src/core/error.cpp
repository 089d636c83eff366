#include "glmstab/error.hpp"

namespace glmstab {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Argument: return "argument error";
    case ErrorCode::Data: return "data error";
    case ErrorCode::OutOfRange: return "out-of-range error";
    case ErrorCode::MissingConstants: return "missing-constants error";
    case ErrorCode::NotPositiveDefinite: return "not-positive-definite error";
    case ErrorCode::UnsupportedDomainTransform: return "unsupported-domain-transform error";
    case ErrorCode::InfeasiblePrediction: return "infeasible-prediction error";
    case ErrorCode::Spec: return "spec error";
    case ErrorCode::Config: return "config error";
    case ErrorCode::Io: return "io error";
  }
  return "error";
}

void fail(ErrorCode code, const std::string& what) {
  throw Error(code, std::string(to_string(code)) + ": " + what);
}

}  // namespace glmstab
