#include "sie/common/error.hpp"

namespace sie {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::syntax: return "SyntaxError";
    case Errc::schema: return "SchemaError";
    case Errc::invalid_argument: return "InvalidArgument";
    case Errc::precondition: return "PreconditionViolation";
    case Errc::io: return "IoError";
    case Errc::missing_profile: return "MissingProfile";
    case Errc::empty_document: return "EmptyDocument";
    case Errc::stage: return "StageError";
    case Errc::wrong_state: return "WrongState";
    case Errc::unknown_field_path: return "UnknownFieldPath";
    case Errc::timeout: return "Timeout";
    case Errc::corrupt_snapshot: return "CorruptSnapshot";
    case Errc::version_mismatch: return "VersionMismatch";
    case Errc::duplicate_section_id: return "DuplicateSectionId";
    case Errc::transport: return "TransportError";
    case Errc::provider: return "ProviderError";
    case Errc::budget_exceeded: return "BudgetExceeded";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::duplicate_in_batch: return "DuplicateInBatch";
    case Errc::embedder: return "EmbedderError";
    case Errc::empty_index: return "EmptyIndex";
    case Errc::not_found: return "NotFound";
    case Errc::schema_violation: return "SchemaViolation";
    case Errc::candidate_escape: return "CandidateEscape";
    case Errc::unknown_run: return "UnknownRun";
    case Errc::session_exists: return "SessionExists";
    case Errc::session_not_found: return "SessionNotFound";
    case Errc::unknown_item: return "UnknownItem";
    case Errc::session_closed: return "SessionClosed";
    case Errc::session_open: return "SessionOpen";
    case Errc::format: return "FormatError";
    case Errc::length_mismatch: return "LengthMismatch";
    case Errc::empty_distribution: return "EmptyDistribution";
    case Errc::empty_input: return "EmptyInput";
  }
  return "Error";
}

Error::Error(Errc code, const std::string& message, std::string subject)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      subject_(std::move(subject)) {}

ProviderError::ProviderError(int status, std::string body)
    : Error(Errc::provider, "provider returned status " + std::to_string(status),
            std::to_string(status)),
      status_(status),
      body_(std::move(body)) {}

void fail(Errc code, const std::string& message, std::string subject) {
  throw Error(code, message, std::move(subject));
}

}  // namespace sie
