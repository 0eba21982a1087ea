#include "fleet/error.hpp"

namespace fleet {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid_argument";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kSchema: return "schema";
    case ErrorKind::kFormat: return "format";
    case ErrorKind::kNumeric: return "numeric";
  }
  return "unknown";
}

}  // namespace fleet
