#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sie/agents/corrections.hpp"
#include "sie/agents/items.hpp"
#include "sie/config/profiles.hpp"
#include "sie/config/task_spec.hpp"
#include "sie/ingestion/document.hpp"

namespace sie::pipeline {

enum class RunState {
  Created,
  Extracted,
  Aligned,
  Judged,
  AwaitingHumanFeedback,
  FeedbackApplied,
  Completed,
  Failed,
};

inline constexpr std::size_t kStateCount = 8;

std::string_view to_string(RunState state) noexcept;
std::optional<RunState> parse_state(std::string_view s) noexcept;
bool is_terminal(RunState state) noexcept;

/// The run graph:
///   Created -> Extracted -> Aligned -> Judged
///   Judged -> AwaitingHumanFeedback          (HIL on)
///   Judged -> Completed                      (HIL off)
///   AwaitingHumanFeedback -> FeedbackApplied
///   FeedbackApplied -> AwaitingHumanFeedback (another round)
///   FeedbackApplied -> Completed
///   any non-terminal state -> Failed
bool is_legal_transition(RunState from, RunState to, bool hil_enabled) noexcept;

struct ExtractionDraft {
  std::vector<agents::ExtractedItem> items;
  bool operator==(const ExtractionDraft&) const = default;
};

struct AlignedSet {
  std::vector<agents::AlignedItem> items;
  bool operator==(const AlignedSet&) const = default;
};

struct JudgedSet {
  std::vector<agents::JudgedItem> items;
  double judge_mean = 0.0;
  bool operator==(const JudgedSet&) const = default;
};

using Payload =
    std::variant<std::monostate, ExtractionDraft, AlignedSet, JudgedSet, agents::FinalOutput>;

/// Name of the payload alternative: "empty", "extraction_draft",
/// "aligned_set", "judged_set" or "final_output".
std::string_view payload_tag(const Payload& payload) noexcept;

/// Whether the payload kind is the one `state` carries. A failed run keeps
/// whatever the last good stage produced.
bool payload_matches_state(RunState state, const Payload& payload) noexcept;

struct FailureCause {
  std::string stage;    ///< agent role, or "engine"
  std::string code;     ///< Errc name of the underlying error
  std::string message;

  bool operator==(const FailureCause&) const = default;
};

struct PipelineRun {
  std::string run_id;
  config::ExtractionTaskSpec spec;
  config::ProfileSet profiles;
  config::RunOptions options;
  ingestion::SourceDocument document;
  RunState state = RunState::Created;
  Payload payload;
  /// Every state entered, starting with Created.
  std::vector<RunState> history;
  /// Times the run has entered AwaitingHumanFeedback.
  int feedback_rounds = 0;
  bool hil_applied = false;
  /// Reviewer corrections so far, re-applied after every model step.
  std::vector<agents::PinnedCorrection> pins;
  std::string guidance;
  bool approve = true;
  std::size_t added_records = 0;
  std::optional<FailureCause> failure;
  std::string usage_ledger_ref;
  std::string memory_scope_ref;
  std::int64_t created_at = 0;
  std::int64_t updated_at = 0;

  const std::string& document_ref() const noexcept { return document.doc_id; }
  bool operator==(const PipelineRun&) const = default;
};

inline constexpr std::string_view kSnapshotMagic = "SSRUN";
inline constexpr int kSnapshotVersion = 1;

/// "SSRUN" envelope around the whole run.
std::string snapshot(const PipelineRun& run);
/// Errc::corrupt_snapshot for damaged bytes, Errc::version_mismatch for a
/// snapshot written by another format version.
PipelineRun restore(std::string_view bytes);

nlohmann::json payload_to_json(const Payload& payload);
Payload payload_from_json(const nlohmann::json& j);

}  // namespace sie::pipeline
