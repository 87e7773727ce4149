#pragma once

#include <stdexcept>
#include <string>

namespace scenesense {

/// Broad failure categories. The CLI maps these onto its exit codes.
enum class ErrorKind {
  kParse,        // malformed input document
  kValidation,   // well-formed input that violates an invariant
  kConfig,       // missing or inconsistent configuration / artifacts
  kIo,           // filesystem failures
  kBackend,      // transport failure talking to a model service
  kAuth,         // the model service rejected our credentials
  kProtocol,     // the model service answered with something unusable
  kDegenerate,   // numerically degenerate input (e.g. all scores -inf)
  kTraining,     // training diverged
  kInternal,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Backend errors carry the request id (HTTP) or the failing query (mocks).
class BackendError : public Error {
 public:
  BackendError(ErrorKind kind, const std::string& message, std::string request_id);

  const std::string& request_id() const noexcept { return request_id_; }

 private:
  std::string request_id_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

}  // namespace scenesense
