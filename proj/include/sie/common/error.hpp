#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sie {

/// Error categories raised across the engine. Each maps to one named
/// failure of a public operation; callers switch on code() rather than
/// parsing messages.
enum class Errc {
  syntax,
  schema,
  invalid_argument,
  precondition,
  io,
  // pipeline
  missing_profile,
  empty_document,
  stage,
  wrong_state,
  unknown_field_path,
  timeout,
  corrupt_snapshot,
  version_mismatch,
  // ingestion
  duplicate_section_id,
  // gateway
  transport,
  provider,
  budget_exceeded,
  dimension_mismatch,
  // ontology store
  duplicate_in_batch,
  embedder,
  empty_index,
  not_found,
  // agents
  schema_violation,
  candidate_escape,
  // memory
  unknown_run,
  // review service
  session_exists,
  session_not_found,
  unknown_item,
  session_closed,
  session_open,
  // eval
  format,
  length_mismatch,
  empty_distribution,
  empty_input,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message, std::string subject = {});

  Errc code() const noexcept { return code_; }
  /// The offending name, path, id or role, when the error is about one.
  const std::string& subject() const noexcept { return subject_; }

 private:
  Errc code_;
  std::string subject_;
};

/// Non-retryable provider response (e.g. HTTP 4xx).
class ProviderError : public Error {
 public:
  ProviderError(int status, std::string body);

  int status() const noexcept { return status_; }
  const std::string& body() const noexcept { return body_; }

 private:
  int status_;
  std::string body_;
};

[[noreturn]] void fail(Errc code, const std::string& message, std::string subject = {});

}  // namespace sie
