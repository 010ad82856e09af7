#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sie/agents/items.hpp"
#include "sie/common/clock.hpp"
#include "sie/pipeline/engine.hpp"
#include "sie/reviewfile/review_file.hpp"

namespace sie::hil {

using reviewfile::Verdict;

enum class SessionStatus { open, submitted, expired };

std::string_view to_string(SessionStatus s) noexcept;
std::optional<SessionStatus> parse_session_status(std::string_view s) noexcept;

struct ReviewItem {
  std::string item_id;
  std::string label;
  std::string entity_type;
  std::optional<ontology::ConceptRef> chosen;
  std::optional<double> judge_score;  ///< empty for reviewer-added rows
  std::string source_sentence;
  std::string section_id;
  Verdict verdict = Verdict::unreviewed;
  /// Field patch, e.g. {"label": "brain region"}; for a missing row, the
  /// whole record.
  std::optional<nlohmann::json> corrected_value;
  std::string note;
  bool added = false;  ///< reviewer-added (verdict missing)

  bool operator==(const ReviewItem&) const = default;
};

struct ReviewSession {
  std::string session_id;
  std::string run_id;
  std::string task_id;
  std::string model_name;
  std::vector<ReviewItem> items;
  SessionStatus status = SessionStatus::open;
  std::int64_t opened_at = 0;
  std::optional<std::int64_t> deadline;
  std::string guidance;

  bool operator==(const ReviewSession&) const = default;
};

/// One reviewer decision. Without item_id it adds a row the model missed.
struct Decision {
  std::optional<std::string> item_id;
  Verdict verdict = Verdict::correct;
  std::optional<nlohmann::json> corrected_value;
  std::string note;
};

struct SubmitRequest {
  std::vector<Decision> decisions;
  std::string guidance;
  /// Marks every still-unreviewed item correct.
  bool approve_remainder = false;
  /// Asks for another feedback round (approve = false).
  bool request_another_round = false;
};

struct SubmitResult {
  agents::HumanFeedback feedback;
  pipeline::RunState run_state = pipeline::RunState::FeedbackApplied;
  std::optional<std::string> next_session_id;
};

nlohmann::json to_json(const ReviewItem& item);
nlohmann::json to_json(const ReviewSession& session);
Decision decision_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Decision& d);
SubmitRequest submit_request_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SubmitRequest& r);

/// Holds paused runs and their review sessions, turns submitted verdicts
/// into HumanFeedback and resumes the run exactly once per session.
/// Thread-safe.
class ReviewService {
 public:
  ReviewService(const pipeline::Engine& engine, Clock clock = system_clock());

  /// Takes ownership of a run. A run that is waiting for review gets a
  /// session at once (its id is returned).
  std::optional<std::string> add_run(pipeline::PipelineRun run,
                                     std::optional<std::int64_t> deadline = std::nullopt);

  /// Errc::unknown_run, Errc::wrong_state (run not waiting for review) or
  /// Errc::session_exists.
  ReviewSession open_session(const std::string& run_id,
                             std::optional<std::int64_t> deadline = std::nullopt);

  ReviewSession session(const std::string& session_id) const;
  std::vector<ReviewSession> sessions(std::optional<SessionStatus> status = std::nullopt) const;

  /// Stores draft decisions (last write per item wins). All decisions are
  /// checked before any is stored: Errc::unknown_item, Errc::invalid_argument
  /// or Errc::session_closed leave the session unchanged.
  ReviewSession record_decisions(const std::string& session_id, const std::vector<Decision>& decisions);

  /// Closes the session, hands the feedback to the engine and resumes the
  /// run until it completes or pauses again (which opens a new session).
  /// Unreviewed items are an error unless approve_remainder is set.
  SubmitResult submit(const std::string& session_id, const SubmitRequest& request);

  /// Review file for a submitted session; Errc::session_open otherwise.
  std::string export_review_file(const std::string& session_id) const;

  /// Expires open sessions whose deadline has passed; their runs complete
  /// without reviewer input. Returns the expired session ids.
  std::vector<std::string> expire_due();

  pipeline::PipelineRun run(const std::string& run_id) const;
  std::vector<std::string> run_ids() const;

  /// The translation rules, exposed for tests: incorrect rows with a patch
  /// become records[i].<field> corrections, incorrect rows with only a note
  /// become guidance lines, missing rows become records[+] additions.
  static agents::HumanFeedback translate(const ReviewSession& session, const std::string& guidance,
                                         bool request_another_round);

 private:
  ReviewSession make_session(const pipeline::PipelineRun& run,
                             std::optional<std::int64_t> deadline) const;
  ReviewSession& find_session(const std::string& session_id);
  const ReviewSession& find_session(const std::string& session_id) const;
  void validate_decisions(const ReviewSession& s, const std::vector<Decision>& decisions) const;
  static void store_decisions(ReviewSession& s, const std::vector<Decision>& decisions);
  /// Applies feedback to a run taken out of runs_ and resumes it.
  SubmitResult hand_over(const std::string& session_id, const agents::HumanFeedback& fb);

  const pipeline::Engine& engine_;
  Clock clock_;
  mutable std::mutex mu_;
  std::map<std::string, pipeline::PipelineRun> runs_;
  std::map<std::string, ReviewSession> sessions_;
  std::map<std::string, std::string> open_by_run_;
};

}  // namespace sie::hil
