#include "scenesense/error.hpp"

namespace scenesense {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kParse: return "parse error";
    case ErrorKind::kValidation: return "validation error";
    case ErrorKind::kConfig: return "config error";
    case ErrorKind::kIo: return "I/O error";
    case ErrorKind::kBackend: return "backend error";
    case ErrorKind::kAuth: return "auth error";
    case ErrorKind::kProtocol: return "protocol error";
    case ErrorKind::kDegenerate: return "degenerate input";
    case ErrorKind::kTraining: return "training error";
    case ErrorKind::kInternal: return "internal error";
  }
  return "error";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

BackendError::BackendError(ErrorKind kind, const std::string& message,
                           std::string request_id)
    : Error(kind, request_id.empty() ? message : message + " [request " + request_id + "]"),
      request_id_(std::move(request_id)) {}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace scenesense
