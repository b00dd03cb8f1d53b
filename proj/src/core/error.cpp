#include "glt/error.hpp"

namespace glt {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::DecoderNotFound: return "DecoderNotFound";
    case ErrorKind::DecodeFailure: return "DecodeFailure";
    case ErrorKind::EmptyVideo: return "EmptyVideo";
    case ErrorKind::MissingIndex: return "MissingIndex";
    case ErrorKind::UnreadableImage: return "UnreadableImage";
    case ErrorKind::FrameTooSmall: return "FrameTooSmall";
    case ErrorKind::EmptyTranscript: return "EmptyTranscript";
    case ErrorKind::TooFewOptions: return "TooFewOptions";
    case ErrorKind::TooManyOptions: return "TooManyOptions";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::IncompleteTranscript: return "IncompleteTranscript";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::SchemaVersionMismatch: return "SchemaVersionMismatch";
    case ErrorKind::CorruptRecord: return "CorruptRecord";
    case ErrorKind::EndpointUnreachable: return "EndpointUnreachable";
    case ErrorKind::HttpError: return "HttpError";
    case ErrorKind::MalformedResponse: return "MalformedResponse";
    case ErrorKind::Timeout: return "Timeout";
    case ErrorKind::InvalidRequest: return "InvalidRequest";
    case ErrorKind::SchemaError: return "SchemaError";
    case ErrorKind::DuplicateQuestionId: return "DuplicateQuestionId";
    case ErrorKind::UnresolvedVideo: return "UnresolvedVideo";
    case ErrorKind::UnknownQuestionId: return "UnknownQuestionId";
    case ErrorKind::MissingGold: return "MissingGold";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::PrivacyViolation: return "PrivacyViolation";
    case ErrorKind::NotFound: return "NotFound";
  }
  return "Unknown";
}

}  // namespace glt
