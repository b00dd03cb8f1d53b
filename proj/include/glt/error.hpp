#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace glt {

enum class ErrorKind {
  // media
  DecoderNotFound,
  DecodeFailure,
  EmptyVideo,
  MissingIndex,
  UnreadableImage,
  FrameTooSmall,
  // prompting / transcript / qa
  EmptyTranscript,
  TooFewOptions,
  TooManyOptions,
  LengthMismatch,
  IncompleteTranscript,
  IoError,
  SchemaVersionMismatch,
  CorruptRecord,
  // inference
  EndpointUnreachable,
  HttpError,
  MalformedResponse,
  Timeout,
  InvalidRequest,
  // eval
  SchemaError,
  DuplicateQuestionId,
  UnresolvedVideo,
  UnknownQuestionId,
  MissingGold,
  // config / gateway
  ConfigError,
  PrivacyViolation,
  NotFound,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure in the library surfaces as this exception; `kind()` is the
/// stable, machine-checkable part and `what()` the human-readable detail.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, int http_status = 0)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind),
        http_status_(http_status) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// Only meaningful for ErrorKind::HttpError.
  int http_status() const noexcept { return http_status_; }

 private:
  ErrorKind kind_;
  int http_status_;
};

}  // namespace glt
