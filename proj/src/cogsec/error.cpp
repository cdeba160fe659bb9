#include "cogsec/error.hpp"

namespace cogsec {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Structural: return "structural";
    case ErrorCode::Validation: return "validation";
    case ErrorCode::Config: return "config";
    case ErrorCode::Conflict: return "conflict";
    case ErrorCode::NotFound: return "not_found";
    case ErrorCode::Persistence: return "persistence";
    case ErrorCode::Training: return "training";
  }
  return "unknown";
}

}  // namespace cogsec
