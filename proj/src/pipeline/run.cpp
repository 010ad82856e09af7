#include "sie/pipeline/run.hpp"

#include "sie/common/envelope.hpp"
#include "sie/common/error.hpp"

namespace sie::pipeline {

using nlohmann::json;

namespace {

constexpr RunState kStates[] = {RunState::Created,
                                RunState::Extracted,
                                RunState::Aligned,
                                RunState::Judged,
                                RunState::AwaitingHumanFeedback,
                                RunState::FeedbackApplied,
                                RunState::Completed,
                                RunState::Failed};

RunState state_from(const json& j) {
  auto s = parse_state(j.get<std::string>());
  if (!s) fail(Errc::corrupt_snapshot, "unknown run state " + j.get<std::string>());
  return *s;
}

}  // namespace

std::string_view to_string(RunState s) noexcept {
  switch (s) {
    case RunState::Created: return "Created";
    case RunState::Extracted: return "Extracted";
    case RunState::Aligned: return "Aligned";
    case RunState::Judged: return "Judged";
    case RunState::AwaitingHumanFeedback: return "AwaitingHumanFeedback";
    case RunState::FeedbackApplied: return "FeedbackApplied";
    case RunState::Completed: return "Completed";
    case RunState::Failed: return "Failed";
  }
  return "Failed";
}

std::optional<RunState> parse_state(std::string_view s) noexcept {
  for (auto st : kStates)
    if (to_string(st) == s) return st;
  return std::nullopt;
}

bool is_terminal(RunState s) noexcept { return s == RunState::Completed || s == RunState::Failed; }

bool is_legal_transition(RunState from, RunState to, bool hil) noexcept {
  if (is_terminal(from)) return false;
  if (to == RunState::Failed) return true;
  switch (from) {
    case RunState::Created: return to == RunState::Extracted;
    case RunState::Extracted: return to == RunState::Aligned;
    case RunState::Aligned: return to == RunState::Judged;
    case RunState::Judged:
      return hil ? to == RunState::AwaitingHumanFeedback : to == RunState::Completed;
    case RunState::AwaitingHumanFeedback: return hil && to == RunState::FeedbackApplied;
    case RunState::FeedbackApplied:
      return hil && (to == RunState::AwaitingHumanFeedback || to == RunState::Completed);
    default: return false;
  }
}

std::string_view payload_tag(const Payload& p) noexcept {
  switch (p.index()) {
    case 0: return "empty";
    case 1: return "extraction_draft";
    case 2: return "aligned_set";
    case 3: return "judged_set";
    default: return "final_output";
  }
}

bool payload_matches_state(RunState s, const Payload& p) noexcept {
  switch (s) {
    case RunState::Created: return std::holds_alternative<std::monostate>(p);
    case RunState::Extracted: return std::holds_alternative<ExtractionDraft>(p);
    case RunState::Aligned: return std::holds_alternative<AlignedSet>(p);
    case RunState::Judged:
    case RunState::AwaitingHumanFeedback:
    case RunState::FeedbackApplied: return std::holds_alternative<JudgedSet>(p);
    case RunState::Completed: return std::holds_alternative<agents::FinalOutput>(p);
    case RunState::Failed: return !std::holds_alternative<agents::FinalOutput>(p);
  }
  return false;
}

json payload_to_json(const Payload& p) {
  json j = {{"tag", std::string(payload_tag(p))}};
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, agents::FinalOutput>) {
          j["value"] = agents::to_json(v);
        } else if constexpr (!std::is_same_v<T, std::monostate>) {
          json items = json::array();
          for (const auto& i : v.items) items.push_back(agents::to_json(i));
          j["items"] = std::move(items);
          if constexpr (std::is_same_v<T, JudgedSet>) j["judge_mean"] = v.judge_mean;
        }
      },
      p);
  return j;
}

Payload payload_from_json(const json& j) {
  const auto tag = j.at("tag").get<std::string>();
  if (tag == "empty") return std::monostate{};
  if (tag == "extraction_draft") {
    ExtractionDraft d;
    for (const auto& i : j.at("items")) d.items.push_back(agents::extracted_from_json(i));
    return d;
  }
  if (tag == "aligned_set") {
    AlignedSet a;
    for (const auto& i : j.at("items")) a.items.push_back(agents::aligned_from_json(i));
    return a;
  }
  if (tag == "judged_set") {
    JudgedSet s;
    for (const auto& i : j.at("items")) s.items.push_back(agents::judged_from_json(i));
    s.judge_mean = j.at("judge_mean").get<double>();
    return s;
  }
  if (tag == "final_output") return agents::final_output_from_json(j.at("value"));
  fail(Errc::corrupt_snapshot, "unknown payload tag " + tag, tag);
}

std::string snapshot(const PipelineRun& r) {
  json profiles = json::array();
  for (const auto& [_, p] : r.profiles) profiles.push_back(config::to_json(p));
  json history = json::array();
  for (auto s : r.history) history.push_back(std::string(to_string(s)));
  json pins = json::array();
  for (const auto& p : r.pins) pins.push_back(agents::to_json(p));
  json body = {{"run_id", r.run_id},
               {"spec", config::to_json(r.spec)},
               {"profiles", profiles},
               {"options", config::to_json(r.options)},
               {"document", json::parse(ingestion::to_json(r.document))},
               {"state", std::string(to_string(r.state))},
               {"payload", payload_to_json(r.payload)},
               {"history", history},
               {"feedback_rounds", r.feedback_rounds},
               {"hil_applied", r.hil_applied},
               {"pins", pins},
               {"guidance", r.guidance},
               {"approve", r.approve},
               {"added_records", r.added_records},
               {"usage_ledger_ref", r.usage_ledger_ref},
               {"memory_scope_ref", r.memory_scope_ref},
               {"created_at", r.created_at},
               {"updated_at", r.updated_at}};
  if (r.failure)
    body["failure"] = {{"stage", r.failure->stage},
                       {"code", r.failure->code},
                       {"message", r.failure->message}};
  return seal(kSnapshotMagic, kSnapshotVersion, body.dump());
}

PipelineRun restore(std::string_view bytes) {
  const auto body = unseal(kSnapshotMagic, kSnapshotVersion, bytes);
  try {
    const auto j = json::parse(body);
    PipelineRun r;
    r.run_id = j.at("run_id").get<std::string>();
    r.spec = config::task_spec_from_json(j.at("spec"));
    for (const auto& p : j.at("profiles")) {
      auto prof = config::profile_from_json(p);
      r.profiles[prof.role] = std::move(prof);
    }
    r.options = config::run_options_from_json(j.at("options"));
    // Bodies were normalized when first parsed; re-parsing is a no-op on them.
    r.document = ingestion::parse_structured_article(j.at("document").dump());
    r.state = state_from(j.at("state"));
    r.payload = payload_from_json(j.at("payload"));
    for (const auto& s : j.at("history")) r.history.push_back(state_from(s));
    r.feedback_rounds = j.at("feedback_rounds").get<int>();
    r.hil_applied = j.at("hil_applied").get<bool>();
    for (const auto& p : j.at("pins")) r.pins.push_back(agents::pin_from_json(p));
    r.guidance = j.at("guidance").get<std::string>();
    r.approve = j.at("approve").get<bool>();
    r.added_records = j.at("added_records").get<std::size_t>();
    r.usage_ledger_ref = j.at("usage_ledger_ref").get<std::string>();
    r.memory_scope_ref = j.at("memory_scope_ref").get<std::string>();
    r.created_at = j.at("created_at").get<std::int64_t>();
    r.updated_at = j.at("updated_at").get<std::int64_t>();
    if (j.contains("failure"))
      r.failure = FailureCause{j["failure"].at("stage").get<std::string>(),
                               j["failure"].at("code").get<std::string>(),
                               j["failure"].at("message").get<std::string>()};
    return r;
  } catch (const json::exception& e) {
    fail(Errc::corrupt_snapshot, std::string("malformed run snapshot: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == Errc::corrupt_snapshot) throw;
    fail(Errc::corrupt_snapshot, std::string("malformed run snapshot: ") + e.what());
  }
}

}  // namespace sie::pipeline
